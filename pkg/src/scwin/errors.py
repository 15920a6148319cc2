"""Exception types shared across the package."""


class ShapeMismatch(ValueError):
    """Edge-spreading component shape differs from the base matrix."""


class SumConstraintViolated(ValueError):
    """Edge-spreading components do not sum to the base matrix."""


class DopingOutOfRange(ValueError):
    """Doping position outside [0, L-1]."""


class DopingTooDense(ValueError):
    """CN doping points closer than m+1 time units to each other or the chain end."""


class LiftFailure(RuntimeError):
    """Could not lift a proto-edge without parallel edges."""


class InvalidRate(ValueError):
    """Code rate outside the open interval (0, 1)."""


class BlockNotInWindow(KeyError):
    """Requested VN time unit is not inside the decoding window."""


class EndOfChain(StopIteration):
    """No target blocks remain to decode."""


class NoMatchingFrames(LookupError):
    """Frame filter matched nothing."""


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
