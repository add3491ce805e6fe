"""Exception hierarchy shared across the package."""


class LevyCouplingError(Exception):
    """Base class for all package errors."""


class ParameterError(LevyCouplingError, ValueError):
    """A numeric parameter is outside its documented validity range."""


class DomainError(LevyCouplingError, ValueError):
    """An evaluation point violates an operation's precondition."""


class EmptySupportError(LevyCouplingError, ValueError):
    """A truncation level removes the whole jump support."""


class StructuralError(LevyCouplingError, RuntimeError):
    """A coefficient field violates a structural assumption (e.g. singular sigma)."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class QuadratureError(LevyCouplingError, RuntimeError):
    """Numerical integration failed to converge; carries the residual estimate."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(LevyCouplingError, RuntimeError):
    """A simulated path left the numerically trustworthy region."""


class CertificateError(LevyCouplingError, RuntimeError):
    """A rate certificate is unavailable (e.g. a divergent ingredient integral)."""


class FitError(LevyCouplingError, RuntimeError):
    """A regression has too few usable points."""


class ConfigError(LevyCouplingError, ValueError):
    """An experiment config file is malformed or violates the schema."""
