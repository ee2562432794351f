"""LFormer - Pan-sharpening with linearly evolved attention."""

from .core import Tensor
from .core.errors import ConfigurationError, DataError, DimensionError, LFormerError, NumericError
from .models import ForwardTrace, LFormerConfig, LFormerModel, build
from .utils.run_config import RunConfig

__version__ = "0.1.0"
__all__ = [
    "ConfigurationError",
    "DataError",
    "DimensionError",
    "ForwardTrace",
    "LFormerConfig",
    "LFormerError",
    "LFormerModel",
    "NumericError",
    "RunConfig",
    "Tensor",
    "build",
]
