"""Exception hierarchy shared by every module of the package."""


class LawstarError(Exception):
    """Base class for all package errors."""


class StructureError(LawstarError):
    """Shapes, block sizes or node references do not fit together."""


class PreconditionError(LawstarError):
    """An operation was called on input outside its domain."""


class HorizonError(LawstarError):
    """A lazy chain was probed beyond its declared horizon."""

    def __init__(self, node, horizon):
        super().__init__(f"node {node!r} lies beyond horizon {horizon}")
        self.node = node
        self.horizon = horizon


class CoherenceError(LawstarError):
    """Coordinates of a would-be thread disagree under a connecting map."""

    def __init__(self, alpha, beta, residual):
        super().__init__(
            f"coordinates at {alpha!r} and {beta!r} are incoherent "
            f"(residual {residual:.3e})"
        )
        self.alpha = alpha
        self.beta = beta
        self.residual = residual


class ConfigError(LawstarError):
    """A configuration document failed to parse or validate."""

    def __init__(self, message, location=None):
        where = f"{location}: " if location else ""
        super().__init__(where + message)
        self.location = location
