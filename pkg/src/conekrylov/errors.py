"""Exception hierarchy shared by all conekrylov modules."""


class ConeKrylovError(Exception):
    """Base class for every error raised by this package."""


class NotPositiveDefinite(ConeKrylovError):
    """Matrix failed the Cholesky pivot test; it is outside the SPD problem class."""


class SingularShift(ConeKrylovError):
    """``M - sJ`` is numerically singular, i.e. ``s`` is an eigenvalue of ``MJ``."""

    def __init__(self, shift, message=None):
        self.shift = shift
        super().__init__(message or f"M - sJ is numerically singular at s={shift!r}")


class DimensionMismatch(ConeKrylovError, ValueError):
    pass


class NoConvergence(ConeKrylovError):
    pass


class ZeroVector(ConeKrylovError, ValueError):
    """Relative residual requested for ``x = 0``; callers handle the trivial solution."""


class InertiaFailure(ConeKrylovError):
    """Projected J-form has no positive eigenvalue (basis too small)."""


class DegenerateCenter(ConeKrylovError):
    """Expansion point is a zero of h, so the reduction carries no information."""


class TooLarge(ConeKrylovError):
    pass


class InvalidParams(ConeKrylovError, ValueError):
    pass


class ParseError(ConeKrylovError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", col {col})" if col is not None else ")")
        super().__init__(message + where)


class NotSymmetric(ConeKrylovError):
    pass


class NotSquare(ConeKrylovError):
    pass
