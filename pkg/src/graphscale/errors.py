"""Exception types shared across the package."""


class GraphscaleError(Exception):
    """Base class for all library errors."""


class InvalidParameter(GraphscaleError):
    """A constructor or operation received data violating its contract."""


class NoConvergence(GraphscaleError):
    """An iterative procedure failed to converge within its budget."""


class NotConverged(GraphscaleError):
    """A requested estimate did not stabilise (e.g. Birkhoff averages)."""


class NoPositiveZero(GraphscaleError):
    """The pressure function has no zero in the admissible range."""


class ModeUnsupported(GraphscaleError):
    """The requested discretisation mode does not apply to this system."""


class InsufficientMass(GraphscaleError):
    """Too few samples in the requested regression window."""


class DegenerateExponent(GraphscaleError):
    """Local exponents cancel; the stability index is not defined."""


class NonHolder(GraphscaleError):
    """Missing Hoelder data for a driven multiplier reduction."""


class ConfigError(GraphscaleError):
    """An experiment configuration failed to parse or validate."""
