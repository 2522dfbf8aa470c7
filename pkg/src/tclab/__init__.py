"""Time-consistency verification for dynamic risk and performance measures."""

__version__ = "0.1.0"

from ._core import BACKEND
from .space import AdaptedProcess, FilteredSpace, RandomVariable, build_space

__all__ = ["BACKEND", "AdaptedProcess", "FilteredSpace", "RandomVariable", "build_space",
           "__version__"]
