"""Exception hierarchy shared by all modules."""


class InterpKitError(Exception):
    """Base class for toolkit errors."""


class DomainError(InterpKitError, ValueError):
    """Argument outside the domain of a function (e.g. t <= 0)."""


class ShapeError(InterpKitError, ValueError):
    """Vectors or matrices that do not match their couples."""


class ParameterError(InterpKitError, ValueError):
    """Invalid scalar parameter such as lambda <= 1 or a non-monotone grid."""


class UnsupportedExponentError(InterpKitError, ValueError):
    """The requested operation has no exact form for this exponent p."""


class RangeAssumptionViolated(InterpKitError):
    """rho or t/rho(t) is bounded, so the sparse sequence cannot be continued."""


class HypothesisViolation(InterpKitError):
    """A construction's hypothesis fails (empty block, coverage failure, ...)."""


class DegenerateInputError(InterpKitError, ValueError):
    """Zero element where a nonzero one is required."""


class InfeasibleError(InterpKitError):
    """No object with the requested properties exists for this input."""


class ConfigError(InterpKitError, ValueError):
    """Malformed run configuration."""
