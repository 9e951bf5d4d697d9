"""Exception hierarchy shared by every module of the lab."""


class LabError(Exception):
    """Base class for all errors raised by sfuc_lab."""


class ConfigurationError(LabError, ValueError):
    pass


class CapacityError(LabError):
    pass


class InvalidGeometry(LabError, ValueError):
    pass


class DataError(LabError, ValueError):
    pass


class DomainError(LabError, ValueError):
    pass


class SolverError(LabError, RuntimeError):
    """Iterative eigensolver failed to converge.

    The best residual reached before giving up is kept on the instance.
    """

    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class UndefinedSubspaceError(LabError, ValueError):
    pass


class FitError(LabError, ValueError):
    pass


class ResolutionError(LabError, ValueError):
    def __init__(self, message, required_resolution=None):
        super().__init__(message)
        self.required_resolution = required_resolution


class UnsupportedShape(LabError, ValueError):
    pass


class NumericError(LabError, ArithmeticError):
    pass
