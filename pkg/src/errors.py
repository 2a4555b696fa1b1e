"""
Exception hierarchy for ModDens
"""
from typing import Optional


class ModDensError(ValueError):
    """Base class for every input or parameter error raised by the toolkit"""


class GraphError(ModDensError):
    """Invalid graph structure (self-loop, negative weight, duplicate edge, ...)"""


class GraphFormatError(GraphError):
    """Malformed graph or partition file, reported with its line number"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:"
        if line is not None:
            location += f"{line}: "
        elif location:
            location += " "
        super().__init__(f"{location}{message}")


class PartitionError(ModDensError):
    """Partition does not match its graph or names an unknown cluster"""


class ParameterError(ModDensError):
    """Numeric parameter outside the range a formula is defined on"""


class GeneratorError(ModDensError):
    """Generator could not produce a valid instance within its retry budget"""


class OracleSizeError(ModDensError):
    """Graph too large for exhaustive partition enumeration"""
