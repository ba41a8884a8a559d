"""Split-step solvers and closeness bounds for lossy and loss-compensated NLS fiber models."""

from . import bounds, field, models, solver, transform
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "bounds", "field", "models", "solver", "transform", "__version__"]
