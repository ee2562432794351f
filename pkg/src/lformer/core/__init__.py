"""Dense tensors with reverse-mode automatic differentiation."""

from . import ops
from .errors import (
    ConfigurationError,
    ContainerFormatError,
    ContainerMagicError,
    ContainerTruncatedError,
    ContainerVersionError,
    DataError,
    DimensionError,
    LFormerError,
    NumericError,
)
from .tensor import (
    FlopTally,
    GradTape,
    Tensor,
    backward,
    benchmark_mode,
    debug_mode,
    flop_tally,
    is_debug,
    is_grad_enabled,
    no_grad,
    set_debug,
)

__all__ = [
    "ConfigurationError",
    "ContainerFormatError",
    "ContainerMagicError",
    "ContainerTruncatedError",
    "ContainerVersionError",
    "DataError",
    "DimensionError",
    "FlopTally",
    "GradTape",
    "LFormerError",
    "NumericError",
    "Tensor",
    "backward",
    "benchmark_mode",
    "debug_mode",
    "flop_tally",
    "is_debug",
    "is_grad_enabled",
    "no_grad",
    "ops",
    "set_debug",
]
