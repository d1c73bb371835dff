"""Exception types shared across the package."""


class WeilError(Exception):
    """Base class for every error raised by weilgeom."""


class AlgebraMismatch(WeilError, ValueError):
    """Operands live in different Weil algebras."""


class NonInvertible(WeilError, ArithmeticError):
    """An element (or Gram matrix) has a vanishing real part."""


class DomainError(WeilError, ValueError):
    """A primitive was evaluated outside its domain."""


class SingularMetric(WeilError, ArithmeticError):
    """The metric determinant vanishes at a probe point."""


class ConfigError(WeilError, ValueError):
    """A configuration or descriptor could not be resolved."""


class DomainExhausted(WeilError, RuntimeError):
    """Rejection sampling could not find in-domain points."""
