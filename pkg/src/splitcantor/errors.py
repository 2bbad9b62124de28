"""Exception types shared across the package."""


class SplitCantorError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SplitCantorError, ValueError):
    """A space or experiment configuration violates its invariants."""


class ResolutionError(SplitCantorError):
    """The requested operation needs more code resolution than M provides."""


class PreconditionError(SplitCantorError):
    """A hypothesis of an operation does not hold for the given inputs."""


class ShapeError(PreconditionError):
    """Measures or functions do not have the shape an operation expects."""


class IncompleteChainError(SplitCantorError):
    """The chain does not determine the whole family yet."""
