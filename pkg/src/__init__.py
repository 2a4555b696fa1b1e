"""
ModDens - modularity density toolkit
"""

__version__ = "1.0.0"

# Submodules pull in numpy/scipy/pandas; import them where needed

__all__ = [
    "get_settings",
    "Graph",
    "Partition",
    "modularity_density_sum",
    "detect",
    "exhaustive_best",
]
