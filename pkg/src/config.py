"""
Configuration management for ModDens
"""
from typing import List
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix MODDENS_)"""

    model_config = SettingsConfigDict(
        env_prefix="MODDENS_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Reproducibility
    seed: int = 0

    # Numerics
    tolerance: float = 1e-9
    report_significant_digits: int = 12

    # Generators
    generator_max_retries: int = 10_000

    # Oracle
    oracle_max_nodes: int = 12
    oracle_max_ties: int = 1000
    oracle_batch_rows: int = 1 << 18

    # Detector
    detector_max_passes: int = 50
    validate_detector_steps: bool = False

    # Verify grid
    verify_pair_sizes: List[int] = [3, 4, 5, 8, 12, 25]
    verify_ring_sizes: List[int] = [3, 4, 5, 6]
    verify_ring_communities: int = 4
    verify_threshold_max_size: int = 12
    verify_threshold_grid_max: int = 50
    verify_random_seeds: int = 50
    verify_random_max_nodes: int = 8
    verify_max_split_fraction: float = 0.1
    verify_expectation_samples: int = 200
    verify_expectation_z: float = 4.0
    verify_identity_seeds: int = 1000

    # Bench
    bench_max_edges: int = 1_000_000
    bench_min_edges: int = 10_000
    bench_steps: int = 5
    bench_repeats: int = 3

    # Logging
    log_level: str = "INFO"

    # Application Metadata
    app_name: str = "ModDens - Modularity Density Toolkit"
    app_version: str = "1.0.0"
    schema_version: str = "1.0"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
