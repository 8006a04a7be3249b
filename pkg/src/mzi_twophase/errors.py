"""Exception hierarchy shared by the library and the command line runner."""


class MZIError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(MZIError, ValueError):
    """Shapes or dimensions do not match, or a matrix is not positive definite."""


class PhysicalityError(StructuralError):
    """A covariance matrix violates the uncertainty relation."""


class ConfigurationError(MZIError, ValueError):
    """An instrument or scenario setting is invalid."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class IndeterminatePhaseError(ConfigurationError):
    """A phase was requested for a vanishing unitary entry."""


class SingularFisherError(MZIError, ArithmeticError):
    """The Fisher information matrix is singular or badly conditioned."""


class EstimatorError(MZIError, ArithmeticError):
    """A closed-form estimator is undefined for the given sample."""
