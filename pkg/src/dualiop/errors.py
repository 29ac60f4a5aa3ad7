"""Exception types raised across the toolkit."""


class DualIopError(Exception):
    """Base class for toolkit errors."""


class DimensionMismatch(DualIopError, ValueError):
    pass


class NonCausalInverse(DualIopError, ArithmeticError):
    """Inverse of a transfer function whose leading numerator coefficient vanishes."""


class PoleOnGrid(DualIopError, ArithmeticError):
    """A frequency-grid point sits on (or numerically at) a pole."""


class IllPosedLoop(DualIopError, ArithmeticError):
    """The static feedthrough loop ``I - G(inf) K(inf)`` is singular."""


class SingularConstantTerm(DualIopError, ArithmeticError):
    pass


class BadOrder(DualIopError, ValueError):
    pass


class ZeroSeed(DualIopError, ValueError):
    pass


class TooShort(DualIopError, ValueError):
    pass


class InfeasibleConstraints(DualIopError, ArithmeticError):
    pass


class NonInvertibleW0(DualIopError, ArithmeticError):
    pass


class UnsupportedMimoRationalController(DualIopError, NotImplementedError):
    pass


class UnstableInput(DualIopError, ValueError):
    pass


class ConfigError(DualIopError, ValueError):
    pass
