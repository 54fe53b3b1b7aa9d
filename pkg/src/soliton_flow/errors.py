"""Exception types raised by the solver modules."""


class SolitonFlowError(Exception):
    """Base class for all package errors."""


class ModelMismatchError(SolitonFlowError, ValueError):
    """An operation was called with an orbit model of the wrong kind."""


class SingularStateError(SolitonFlowError, ValueError):
    """A warping function is non-positive where the equations divide by it."""


class CoordinateBreakdownError(SolitonFlowError, ValueError):
    """The phase-space coordinates are undefined (xi = 0, W <= 0 or Y_i = 0)."""


class ConfigError(SolitonFlowError, ValueError):
    """A run configuration could not be parsed or is inconsistent."""
