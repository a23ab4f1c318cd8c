"""Free-group combinatorics, positive characters and a spectral test of freeness."""

__version__ = "0.1.0"

from .characters import (  # noqa: E402
    DeltaCharacter,
    TableCharacter,
    TraceCharacter,
    delta_character,
    moment,
    table_character,
    trace_character,
)
from .errors import InvalidInput, ResourceLimitError, WitnessNotFound  # noqa: E402
from .freegroup import FreeGroup  # noqa: E402
from .spectral import freeness_gap, operator_norm  # noqa: E402
from .unitaries import UnitaryFamily  # noqa: E402

__all__ = [
    "__version__",
    "DeltaCharacter",
    "FreeGroup",
    "InvalidInput",
    "ResourceLimitError",
    "TableCharacter",
    "TraceCharacter",
    "UnitaryFamily",
    "WitnessNotFound",
    "delta_character",
    "freeness_gap",
    "moment",
    "operator_norm",
    "table_character",
    "trace_character",
]
