"""Exception hierarchy shared by all modules."""


class GmrfError(Exception):
    """Base class for library errors."""


class ParameterError(GmrfError, ValueError):
    pass


class SizeGuardError(GmrfError):
    """Refusal: the requested brute-force computation is too large."""


class NotPositiveDefinite(GmrfError, ArithmeticError):
    def __init__(self, pivot, message=None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class NoConvergence(GmrfError, RuntimeError):
    def __init__(self, residual, iterations, message=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            message or f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class InfeasibleSpec(GmrfError):
    """The constraint set appears empty (best-effort detection)."""


class NotChordal(GmrfError):
    pass


class OverlapMismatch(GmrfError, ValueError):
    pass


class NotApplicable(GmrfError):
    """An audit's hypotheses do not cover the given input."""


class PoleError(GmrfError, ArithmeticError):
    def __init__(self, x, message=None):
        self.x = x
        super().__init__(message or f"zeta function has a pole near x={x}")


class NoStabilization(GmrfError, RuntimeError):
    pass


class IntegrityError(GmrfError):
    """An exact invariant was violated; indicates a bug."""
