class PruferLabError(Exception):
    """Base class for all errors raised by the package."""


class ParameterError(PruferLabError, ValueError):
    pass


class DimensionError(PruferLabError, ValueError):
    pass


class SingularResolventError(PruferLabError, ZeroDivisionError):
    pass


class DegeneratePotentialError(PruferLabError, ValueError):
    pass


class OutOfScopeError(PruferLabError, ValueError):
    pass


class BracketError(PruferLabError, RuntimeError):
    """Raised when the phase scan is non-monotone beyond tolerance.

    ``kappas`` holds the offending pair of wavenumbers.
    """

    def __init__(self, message, kappas=None):
        super().__init__(message)
        self.kappas = kappas


class AsymptoticRegimeError(PruferLabError, RuntimeError):
    pass


class QuadratureError(PruferLabError, RuntimeError):
    pass


class ConfigError(PruferLabError, ValueError):
    pass
