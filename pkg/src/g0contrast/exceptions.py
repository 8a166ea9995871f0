"""Exception hierarchy shared by every module of the package."""


class G0Error(Exception):
    """Base class for all errors raised by g0contrast."""


class DomainError(G0Error, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class UnsupportedRegionError(G0Error, ArithmeticError):
    """A series or closed form cannot be evaluated reliably at the given point.

    Callers are expected to fall back to numerical quadrature.
    """


class PoleError(UnsupportedRegionError):
    """A closed form sits on (or too close to) a removable singularity."""


class QuadratureError(G0Error, ArithmeticError):
    """Adaptive quadrature exhausted its budget before reaching tolerance."""

    def __init__(self, message, estimate=None, abs_error=None):
        super().__init__(message)
        self.estimate = estimate
        self.abs_error = abs_error


class EstimationError(G0Error, RuntimeError):
    """Maximum likelihood fitting failed from every starting point."""


class TestUnavailableError(G0Error, RuntimeError):
    """A two-sample test could not be carried out (e.g. a fit failed)."""

    __test__ = False  # keep pytest from collecting this class


class DegenerateResultError(G0Error, RuntimeError):
    """An aggregate (rate table, Monte Carlo report) has no usable units."""
