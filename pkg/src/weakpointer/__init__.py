"""Inaccurate Gaussian pointers on classical and quantum two-path systems."""

from .errors import ConfigError, NormalizationError
from .pointers import ACCURATE, DECOUPLED, ClassicalPath, PointerConfig

__version__ = "0.1.0"

__all__ = [
    "ACCURATE",
    "DECOUPLED",
    "ClassicalPath",
    "ConfigError",
    "NormalizationError",
    "PointerConfig",
]
