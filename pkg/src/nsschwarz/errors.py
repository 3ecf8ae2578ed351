"""Exception hierarchy shared by all modules."""


class SchwarzError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(SchwarzError, ValueError):
    pass


class SingularMatrix(SchwarzError, ArithmeticError):
    pass


class ConvergenceFailure(SchwarzError, ArithmeticError):
    pass


class InvalidElementCount(SchwarzError, ValueError):
    pass


class OutOfDomain(SchwarzError, ValueError):
    pass


class NonNestedMeshes(SchwarzError, ValueError):
    pass


class DegreeMismatch(SchwarzError, ValueError):
    pass


class IndexOutOfRange(SchwarzError, IndexError):
    pass


class SingularLocalMatrix(SingularMatrix):
    """A local stiffness matrix A_j could not be factored.

    This means the subspace pair (V_j, W_j) is not compatible with the
    global bilinear form.
    """

    def __init__(self, j, message=None):
        self.j = j
        super().__init__(message or f"local matrix A_{j} is singular")


class SingularOperator(SingularMatrix):
    pass


class MaxIterExceeded(SchwarzError, RuntimeError):
    """Iteration cap reached; ``x`` and ``stats`` hold the best iterate."""

    def __init__(self, x, stats):
        self.x = x
        self.stats = stats
        super().__init__(
            f"no convergence after {stats.iterations} iterations "
            f"(relative residual {stats.final_relative_residual:.3e})"
        )


class Divergence(MaxIterExceeded):
    pass


class ConfigError(SchwarzError, ValueError):
    pass
