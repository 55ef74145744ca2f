"""Exception hierarchy shared by every tre_kit module."""


class TreKitError(Exception):
    """Base class for all errors raised by tre_kit."""


class NonHermitianInput(TreKitError, ValueError):
    pass


class NotPositiveSemidefinite(TreKitError, ValueError):
    pass


class NotAState(TreKitError, ValueError):
    """Raised when a PSD matrix does not have unit trace."""


class DimensionMismatch(TreKitError, ValueError):
    pass


class ParameterOutOfRange(TreKitError, ValueError):
    pass


class SupportMismatch(TreKitError, ValueError):
    """An argument has weight outside the support where the result is finite."""


class EigensolverFailure(TreKitError, ArithmeticError):
    pass


class QuadratureNonConvergence(TreKitError, ArithmeticError):
    pass


class InvalidSpec(TreKitError, ValueError):
    """Malformed ensemble or suite configuration."""
