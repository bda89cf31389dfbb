"""Penalty-tuned phase-field fracture: 1D theory, tuning and 2D P1 solvers."""

from .errors import (AssemblyError, ConfigurationError, ConvergenceError, DomainError,
                     MeshError, PfPenaltyError, SolverError)
from .model import MaterialSpec, ModelKind, SplitKind

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "ConfigurationError", "ConvergenceError", "DomainError", "MeshError",
    "PfPenaltyError", "SolverError", "MaterialSpec", "ModelKind", "SplitKind",
]
