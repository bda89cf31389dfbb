"""Exception taxonomy shared by the numerical modules and the CLI."""


class PfPenaltyError(Exception):
    """Base class for all package errors."""


class DomainError(PfPenaltyError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigurationError(PfPenaltyError, ValueError):
    """Inconsistent model or run configuration."""


class MeshError(PfPenaltyError, ValueError):
    """Malformed mesh data or mesh file."""


class AssemblyError(PfPenaltyError):
    """Degenerate element encountered during assembly."""


class SolverError(PfPenaltyError):
    """Linear solver breakdown; ``trace`` holds the residual history."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class ConvergenceError(PfPenaltyError):
    """Nonlinear iteration did not converge; ``history`` holds residuals."""

    def __init__(self, message, history=None, step=None):
        super().__init__(message)
        self.history = list(history or [])
        self.step = step
