"""
Pydantic models for parameters and reports
"""
import json
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from src.config import get_settings


class MetricName(str, Enum):
    """Partition quality scores"""
    M = "M"
    D = "D"


class Family(str, Enum):
    """Synthetic network families"""
    ER_SINGLE = "er_single"
    TWO_COMMUNITIES_BRIDGED = "two_communities_bridged"
    RING_OF_COMMUNITIES = "ring_of_communities"
    TWO_CLIQUES_W_BRIDGE = "two_cliques_w_bridge"


class Claim(str, Enum):
    """Inequalities checked by the verify suite"""
    NO_SPLIT = "no_split"
    SEP_BEATS_MERGE = "sep_beats_merge"
    SEP_BEATS_MERGE_K = "sep_beats_merge_k"
    THRESHOLD_W = "threshold_w"
    THRESHOLD_W_D = "threshold_w_d"


class InitMode(str, Enum):
    SINGLETONS = "singletons"
    GIVEN_PARTITION = "given-partition"


class MoveOrder(str, Enum):
    NODE_ID = "node-id"
    SHUFFLED = "shuffled"


def round_significant(value: Any, digits: int) -> Any:
    """Round every float inside a JSON-like structure to `digits` significant digits"""
    if isinstance(value, float):
        if not math.isfinite(value) or value == 0.0:
            return value
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_significant(v, digits) for k, v in value.items()}
    if isinstance(value, list):
        return [round_significant(v, digits) for v in value]
    return value


class Report(BaseModel):
    """Base for serialized reports"""
    schema_version: str = Field(default_factory=lambda: get_settings().schema_version)

    def to_dict(self) -> Dict[str, Any]:
        digits = get_settings().report_significant_digits
        return round_significant(self.model_dump(mode="json"), digits)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

class ClusterReport(BaseModel):
    """Per-cluster decomposition of a metric"""
    id: Union[int, str] = Field(..., description="Cluster label")
    size: int = Field(..., ge=1, description="Number of nodes in the cluster")
    M_c: float = Field(..., description="Cluster term of the metric")
    cohesion: float = Field(..., description="Internal association term")
    separation: float = Field(..., description="External association term")


class MetricReport(Report):
    """Global metric value with its per-cluster breakdown"""
    metric: MetricName = Field(..., description="Which metric was evaluated")
    M: float = Field(..., description="Metric value")
    connected: bool = Field(..., description="Whether the graph is connected")
    clusters: List[ClusterReport] = Field(default_factory=list)
    residual: Optional[float] = Field(None, description="|sum form - tensor form| when both were computed")

    @property
    def value(self) -> float:
        return self.M


class ThresholdResult(BaseModel):
    """Limiting bridge totals for two cliques of sizes m and n"""
    m: int = Field(..., ge=3)
    n: int = Field(..., ge=3)
    w_M: float
    w_D: float
    ratio_minus_one: float


class AnalyticQuantity(BaseModel):
    """One closed-form quantity derived for a synthetic family"""
    quantity: str
    closed_form_value: float


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

class GeneratorSpec(BaseModel):
    """Parameters of a synthetic family plus the RNG seed"""
    family: Family
    sizes: List[int] = Field(..., min_length=1, description="Community sizes m_i")
    probs: Optional[List[float]] = Field(None, description="Edge probabilities p_{m_i}; defaults to 1.0")
    bridge_count: int = Field(1, ge=0, description="Bridge edges w (two_cliques_w_bridge only)")
    seed: int = Field(0, ge=0, lt=2 ** 64)

    @field_validator("sizes")
    @classmethod
    def _sizes_at_least_three(cls, sizes: List[int]) -> List[int]:
        for m in sizes:
            if m < 3:
                raise ValueError(f"community size {m} < 3")
        return sizes

    @model_validator(mode="after")
    def _check_family(self) -> "GeneratorSpec":
        if self.probs is None:
            self.probs = [1.0] * len(self.sizes)
        if len(self.probs) != len(self.sizes):
            raise ValueError("probs and sizes must have the same length")
        for m, p in zip(self.sizes, self.probs):
            p_min = 2.0 / (m - 1)
            if p < p_min - 1e-12 or p > 1.0:
                raise ValueError(f"p={p} outside [{p_min}, 1] for m={m}")

        expected = {
            Family.ER_SINGLE: 1,
            Family.TWO_COMMUNITIES_BRIDGED: 2,
            Family.TWO_CLIQUES_W_BRIDGE: 2,
        }.get(self.family)
        if expected is not None and len(self.sizes) != expected:
            raise ValueError(f"{self.family.value} needs {expected} size(s), got {len(self.sizes)}")
        if self.family == Family.RING_OF_COMMUNITIES and len(self.sizes) < 3:
            raise ValueError("a ring needs at least 3 communities")
        if self.family == Family.TWO_CLIQUES_W_BRIDGE:
            if any(p != 1.0 for p in self.probs):
                raise ValueError("two_cliques_w_bridge communities are cliques (p=1)")
            if self.bridge_count > self.sizes[0] * self.sizes[1]:
                raise ValueError(f"w={self.bridge_count} exceeds m*n={self.sizes[0] * self.sizes[1]}")
        return self

    def parameters(self) -> Dict[str, Any]:
        """Family parameters as a flat dict, for reports"""
        params: Dict[str, Any] = {
            "family": self.family.value,
            "sizes": list(self.sizes),
            "probs": list(self.probs or []),
            "seed": self.seed,
        }
        if self.family == Family.TWO_CLIQUES_W_BRIDGE:
            params["w"] = self.bridge_count
        return params


class GeneratorMetadata(Report):
    """Metadata written next to a generated instance"""
    spec: GeneratorSpec
    prng: str
    node_count: int
    edge_count: int


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------

class OracleResult(Report):
    """Exhaustive argmax over all set partitions"""
    best_partition: List[int] = Field(..., description="Restricted growth string of the argmax")
    best_value: float
    metric: MetricName
    partitions_evaluated: int
    ties: List[List[int]] = Field(default_factory=list, description="Co-optimal partitions in canonical order")
    ties_truncated: bool = False
    node_labels: List[str] = Field(default_factory=list, description="Original label of each dense node id")


class ClaimCheck(BaseModel):
    """Outcome of one inequality check"""
    claim_id: str
    family: Dict[str, Any] = Field(default_factory=dict)
    expected: str = Field(..., description="Relation that must hold")
    observed: Dict[str, float] = Field(default_factory=dict)
    passed: bool
    margin: float = Field(..., description="Signed slack of the relation (>= 0 when it holds)")
    partition: Optional[List[int]] = Field(None, description="Oracle argmax as a restricted growth string")
    statistical: bool = Field(False, description="Per-sample observation judged by an aggregate check")


class VerifyReport(Report):
    """Collection of claim checks"""
    suite: str
    checks: List[ClaimCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def failures(self) -> List[ClaimCheck]:
        """Failed checks; statistical samples count only through their aggregate check"""
        return [check for check in self.checks if not check.passed and not check.statistical]

    def extend(self, checks: List[ClaimCheck]) -> None:
        self.checks.extend(checks)


# ---------------------------------------------------------------------------
# Bipartition
# ---------------------------------------------------------------------------

class BipartitionEval(Report):
    """δM of one proposed split with its Laplacian decomposition"""
    cluster: int
    n_a: int
    n_b: int
    delta_m: float
    delta_I_c: float
    alpha: float
    beta: float
    lambda_: Optional[float] = Field(None, alias="lambda", description="Undefined when fDf = 0")
    fDf: float
    fLf: float
    f: Dict[int, float] = Field(default_factory=dict)
    delta_N: Dict[int, float] = Field(default_factory=dict)
    degenerate: bool = Field(False, description="Edgeless induced subgraph; δM taken from the direct path")
    node_labels: List[str] = Field(default_factory=list, description="Original label of each dense node id")

    model_config = {"populate_by_name": True}

    def to_dict(self) -> Dict[str, Any]:
        digits = get_settings().report_significant_digits
        return round_significant(self.model_dump(mode="json", by_alias=True), digits)


# ---------------------------------------------------------------------------
# Detector
# ---------------------------------------------------------------------------

class DetectorConfig(BaseModel):
    """Greedy maximizer settings"""
    max_passes: int = Field(default_factory=lambda: get_settings().detector_max_passes, ge=1)
    min_gain: float = Field(1e-9, ge=0.0)
    seed: int = Field(default_factory=lambda: get_settings().seed)
    init: InitMode = InitMode.SINGLETONS
    move_order: MoveOrder = MoveOrder.NODE_ID
    metric: MetricName = MetricName.M
    validate_steps: bool = Field(default_factory=lambda: get_settings().validate_detector_steps)


class TraceStep(BaseModel):
    """One accepted detector step"""
    step: int
    pass_index: int
    kind: str = Field(..., description="'move' or 'merge'")
    node: Optional[int] = None
    source: int
    target: int
    gain: float
    value: float = Field(..., description="Objective after the step")


class DetectorOutcome(BaseModel):
    """One detector run inside a comparison"""
    metric: MetricName
    assignment: List[int]
    value: float
    cluster_count: int
    exact_match: Optional[bool] = None
    rand_index: Optional[float] = None


class DetectorComparison(Report):
    """Side-by-side detector runs under different objectives"""
    connected: bool
    outcomes: List[DetectorOutcome] = Field(default_factory=list)
    node_labels: List[str] = Field(default_factory=list, description="Original label of each dense node id")


# ---------------------------------------------------------------------------
# Bench
# ---------------------------------------------------------------------------

class BenchPoint(BaseModel):
    edges: int
    nodes: int
    clusters: int
    seconds: float


class BenchReport(Report):
    """Timing of metric evaluation over growing sparse graphs"""
    seed: int
    points: List[BenchPoint] = Field(default_factory=list)
    slope: Optional[float] = Field(None, description="log-log slope of time vs |E|; needs two or more points")
