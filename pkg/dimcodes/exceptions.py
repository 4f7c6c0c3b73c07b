"""Exception hierarchy shared by every dimcodes module."""


class DimcodesError(Exception):
    """Base class for all errors raised by dimcodes."""


class DomainError(DimcodesError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapExceededError(DimcodesError):
    """An exhaustive operation was asked to run beyond its size cap."""

    def __init__(self, operation, n, cap):
        self.operation = operation
        self.n = n
        self.cap = cap
        super().__init__(
            f"{operation}: n={n} exceeds the exhaustive cap {cap} "
            f"(raise it with --cap or the cap= argument)"
        )


class CodeSearchError(DimcodesError):
    """No seed below the retry cap produced a verified code."""

    def __init__(self, n, r, tried, stats):
        self.n = n
        self.r = r
        self.tried = tried
        self.stats = dict(stats)
        super().__init__(
            f"no verified code for n={n}, r={r} within {tried} seeds "
            f"(failures: {self.stats})"
        )


class HorizonError(DimcodesError):
    """A stream was asked for more than its horizon can provide."""


class VerificationError(DimcodesError):
    """A requested verification did not pass."""
