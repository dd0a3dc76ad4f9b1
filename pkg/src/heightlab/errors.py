"""Exception hierarchy shared by all heightlab modules."""


class HeightlabError(Exception):
    """Base class; the CLI maps subclasses onto exit codes."""

    exit_code = 2


class InputError(HeightlabError, ValueError):
    exit_code = 2


class AllZero(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotFano(InputError):
    pass


class ParameterOutOfRange(InputError):
    pass


class FieldShapeInvalid(InputError):
    pass


class OrderViolation(InputError):
    pass


class Degenerate(InputError):
    pass


class InsufficientData(InputError):
    pass


class BadReduction(InputError):
    pass


class BudgetExceeded(HeightlabError):
    exit_code = 3


class QuadratureFailure(HeightlabError):
    exit_code = 3


class ResolutionTooLow(QuadratureFailure):
    pass


class NotStabilized(HeightlabError):
    exit_code = 3
