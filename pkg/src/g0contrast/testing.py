"""Two-sample hypothesis test of equal G0 parameters based on (h, phi) distances.

Under the null hypothesis theta_1 = theta_2 the statistic
S = 2 m n v / (m + n) * d(theta_1_hat, theta_2_hat) is asymptotically
chi-square with as many degrees of freedom as estimated parameters (two:
alpha and gamma, with the number of looks known).
"""
from __future__ import annotations

from dataclasses import dataclass

from .distances import DistanceKind, EvalMethod, distance
from .estimation import FitResult, fit_ml
from .exceptions import DomainError, EstimationError, G0Error, TestUnavailableError
from .model import G0Params, Sample
from .special import reg_upper_gamma

__all__ = ["TestOutcome", "DEGREES_OF_FREEDOM", "v_constant", "statistic", "p_value", "test_samples"]

DEGREES_OF_FREEDOM = 2

_V = {
    "kullback_leibler": 1.0,
    "hellinger": 4.0,
    "bhattacharyya": 4.0,
    "jensen_shannon": 4.0,
    "arithmetic_geometric": 4.0,
    "triangular": 1.0,
    "harmonic_mean": 2.0,
}


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    statistic: float
    df: int
    p_value: float
    reject: bool
    level: float
    kind: DistanceKind
    m: int
    n: int


def v_constant(kind: DistanceKind) -> float:
    """Scaling constant 1 / (h'(0) phi''(1)) of the kind."""
    if kind.name == "renyi":
        return 1.0 / kind.beta
    return _V[kind.name]


def _params(fit) -> G0Params:
    return fit.params if isinstance(fit, FitResult) else fit


def statistic(kind: DistanceKind, fit1, m: int, fit2, n: int,
              method: EvalMethod = EvalMethod.AUTO) -> float:
    """S = 2 m n v / (m + n) * d between two fitted laws (FitResult or G0Params)."""
    if m < 2 or n < 2:
        raise DomainError(f"sample sizes must be >= 2, got m={m}, n={n}")
    d = distance(kind, _params(fit1), _params(fit2), method)
    return statistic_from_distance(kind, d, m, n)


def statistic_from_distance(kind: DistanceKind, d: float, m: int, n: int) -> float:
    return 2.0 * m * n * v_constant(kind) / (m + n) * d


def p_value(s: float, df: int = DEGREES_OF_FREEDOM) -> float:
    """Pr(chi2_df > s)."""
    if not s >= 0:
        raise DomainError(f"statistic must be nonnegative, got {s!r}")
    if df < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df!r}")
    return reg_upper_gamma(df / 2.0, s / 2.0)


def _check_level(level: float):
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")


def decide(kind: DistanceKind, s: float, level: float, m: int, n: int) -> TestOutcome:
    _check_level(level)
    p = p_value(s, DEGREES_OF_FREEDOM)
    return TestOutcome(s, DEGREES_OF_FREEDOM, p, p <= level, level, kind, m, n)


def test_samples(kind: DistanceKind, s1: Sample, s2: Sample, level: float = 0.05,
                 method: EvalMethod = EvalMethod.AUTO) -> TestOutcome:
    """Fit both samples by ML and test equality of their parameters at ``level``."""
    _check_level(level)
    if s1.looks != s2.looks:
        raise DomainError(f"samples have different looks ({s1.looks} vs {s2.looks})")
    try:
        f1 = fit_ml(s1)
        f2 = fit_ml(s2)
    except (EstimationError, DomainError) as exc:
        raise TestUnavailableError(f"fit failed: {exc}") from exc
    try:
        s = statistic(kind, f1, len(s1), f2, len(s2), method)
    except G0Error as exc:
        raise TestUnavailableError(f"distance failed: {exc}") from exc
    return decide(kind, s, level, len(s1), len(s2))


# not a pytest test despite the name
test_samples.__test__ = False
