"""Exception types raised by expray."""


class ExpRayError(Exception):
    """Base class for all expray errors."""


class AddressSyntaxError(ExpRayError, ValueError):
    pass


class OverflowDepth(ExpRayError, OverflowError):
    """An iterate of the growth model (or of the map) left the representable range."""

    def __init__(self, msg, level=None):
        super().__init__(msg)
        self.level = level


class DomainError(ExpRayError, ValueError):
    """Potential outside the admissible interval of the address."""


class BoundaryStrip(ExpRayError):
    """An orbit point sits on a strip boundary, so its address entry is ill-defined."""

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class SingularHit(ExpRayError):
    """A pullback passed (numerically) through the singular value."""

    def __init__(self, msg, level=None, t=None):
        super().__init__(msg)
        self.level = level
        self.t = t


class NoConvergence(ExpRayError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class ContinuationStuck(ExpRayError):
    def __init__(self, msg, last_t=None, last_kappa=None):
        super().__init__(msg)
        self.last_t = last_t
        self.last_kappa = last_kappa


class NotFastAddress(ExpRayError):
    pass


class NotEscaping(ExpRayError):
    def __init__(self, msg, verdict=None):
        super().__init__(msg)
        self.verdict = verdict


class RoundtripFailure(ExpRayError):
    def __init__(self, msg, roundtrip_error=None):
        super().__init__(msg)
        self.roundtrip_error = roundtrip_error
