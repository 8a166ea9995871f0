"""Special functions and quadrature used throughout the package.

Everything here is a pure function of its arguments.  The hypergeometric
series refuse to answer outside their convergent region instead of
transforming; the distance code treats that refusal as a cue to fall back
on :func:`integrate_semi_infinite`.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special as _sp

from .exceptions import DomainError, QuadratureError, UnsupportedRegionError

__all__ = [
    "QuadratureResult",
    "ln_gamma",
    "digamma",
    "harmonic",
    "gauss_2f1",
    "hyp_3f2",
    "reg_upper_gamma",
    "integrate_semi_infinite",
    "log_gamma_signed",
]

EULER_GAMMA = 0.57721566490153286060651209

# Bernoulli-number coefficients B_2k / (2k) of the digamma asymptotic series.
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"ln_gamma requires a finite x > 0, got {x!r}")
    return math.lgamma(x)


def log_gamma_signed(x: float) -> tuple[float, float]:
    """Return (sign, log|Gamma(x)|), allowing negative non-integer x."""
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x!r}")
    if x > 0:
        return 1.0, math.lgamma(x)
    sign = -1.0 if int(math.floor(x)) % 2 else 1.0
    return sign, math.lgamma(x)


def digamma(x: float) -> float:
    """psi(x) for x > 0, by upward recurrence to x >= 8 and the asymptotic series."""
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"digamma requires a finite x > 0, got {x!r}")
    acc = 0.0
    while x < 8.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coef in _DIGAMMA_ASYMPTOTIC:
        series += coef * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def harmonic(n: int) -> float:
    """n-th harmonic number, with harmonic(0) == 0."""
    if n < 0 or int(n) != n:
        raise DomainError(f"harmonic requires a nonnegative integer, got {n!r}")
    return math.fsum(1.0 / k for k in range(1, int(n) + 1))


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def _pfq_series(num: Sequence[float], den: Sequence[float], z: float,
                rel_tol: float, max_terms: int) -> float:
    """Sum the generalized hypergeometric series with term-ratio updates.

    Convergence is declared once a bound on the remaining tail drops below
    ``rel_tol * |sum|``.  The bound is only trusted after the index has passed
    every parameter magnitude, where the term ratio is monotone.
    """
    total = 1.0
    term = 1.0
    largest = 1.0
    guard = max(abs(p) for p in (*num, *den)) + 2.0
    excess = sum(den) - sum(num)  # only meaningful when |z| == 1
    az = abs(z)
    for k in range(max_terms):
        top = 1.0
        for p in num:
            top *= p + k
        if top == 0.0:
            return total  # terminating (polynomial) series
        bottom = float(k + 1)
        for q in den:
            bottom *= q + k
        term *= top / bottom * z
        total += term
        largest = max(largest, abs(term))
        if k + 1 < guard:
            continue
        kk = k + 1
        nxt = z
        for p in num:
            nxt *= p + kk
        for q in den:
            nxt /= q + kk
        nxt = abs(nxt / (kk + 1))
        if az < 1.0:
            rho = max(nxt, az)
            if rho >= 1.0:
                continue  # terms still growing
            tail = abs(term) * rho / (1.0 - rho)
        else:
            tail = abs(term) * (kk + 1) / excess
        if tail <= rel_tol * abs(total):
            if largest * 1e-16 > rel_tol * abs(total):
                raise UnsupportedRegionError("hypergeometric series lost precision to cancellation")
            return total
    raise UnsupportedRegionError(
        f"hypergeometric series did not converge within {max_terms} terms (z={z!r})"
    )


def gauss_2f1(a: float, b: float, c: float, z: float,
              rel_tol: float = 1e-12, max_terms: int = 10_000) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for |z| < 1.

    Raises DomainError when c is a nonpositive integer and
    UnsupportedRegionError when |z| >= 1 or the series stalls.
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 has a pole at c={c!r}")
    if z == 0.0:
        return 1.0
    if not abs(z) < 1.0:
        raise UnsupportedRegionError(f"2F1 series does not converge at z={z!r}")
    return _pfq_series((a, b), (c,), z, rel_tol, max_terms)


def hyp_3f2(a1: float, a2: float, a3: float, b1: float, b2: float, z: float,
            rel_tol: float = 1e-12, max_terms: int = 10_000) -> float:
    """Generalized hypergeometric 3F2(a1, a2, a3; b1, b2; z) for |z| <= 1.

    On the unit circle the series is summed only when b1 + b2 - a1 - a2 - a3 > 0.
    """
    if _is_nonpositive_integer(b1) or _is_nonpositive_integer(b2):
        raise DomainError(f"3F2 has a pole at b=({b1!r}, {b2!r})")
    if z == 0.0:
        return 1.0
    if abs(z) > 1.0:
        raise UnsupportedRegionError(f"3F2 series does not converge at z={z!r}")
    if abs(z) == 1.0 and b1 + b2 - a1 - a2 - a3 <= 0:
        raise UnsupportedRegionError("3F2 series diverges on the unit circle for these parameters")
    return _pfq_series((a1, a2, a3), (b1, b2), z, rel_tol, max_terms)


def reg_upper_gamma(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s)."""
    if not s > 0 or not x >= 0 or math.isnan(x):
        raise DomainError(f"reg_upper_gamma requires s > 0 and x >= 0, got s={s!r}, x={x!r}")
    return float(_sp.gammaincc(s, x))


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

# Gauss-Kronrod 10/21 abscissae on [0, 1] (nonnegative half) and weights.
_XK = np.array([
    0.0,
    0.14887433898163122,
    0.2943928627014602,
    0.4333953941292472,
    0.5627571346686047,
    0.6794095682990244,
    0.7808177265864169,
    0.8650633666889845,
    0.9301574913557082,
    0.9739065285171717,
    0.9956571630258081,
])
_WK = np.array([
    0.1494455540029169,
    0.14773910490133849,
    0.14277593857706009,
    0.13470921731147334,
    0.12349197626206584,
    0.10938715880229764,
    0.0931254545836976,
    0.07503967481091996,
    0.054755896574351995,
    0.032558162307964725,
    0.011694638867371874,
])
_WG = np.array([
    0.0,
    0.29552422471475287,
    0.0,
    0.26926671930999635,
    0.0,
    0.21908636251598204,
    0.0,
    0.1494513491505806,
    0.0,
    0.06667134430868814,
    0.0,
])
_NODES = np.concatenate([-_XK[:0:-1], _XK])
_KRONROD = np.concatenate([_WK[:0:-1], _WK])
_GAUSS = np.concatenate([_WG[:0:-1], _WG])


@dataclass(frozen=True)
class QuadratureResult:
    value: float | np.ndarray
    abs_error_estimate: float | np.ndarray
    evaluations: int


# Tail nodes with u below this are dropped; they stand for x > 1e150.
_U_MIN = 1e-75
_U_MAX = math.sqrt(0.5)


def _gk_rule(f, lo: np.ndarray, hi: np.ndarray, upper: np.ndarray):
    """Apply the 21-point rule to each interval, with one call to f.

    Intervals with ``upper`` False live in t = x / (1 + x) on [0, 1/2];
    the others live in u with u**2 = 1 - t = 1 / (1 + x) on [0, sqrt(1/2)].
    Working with u keeps the map resolvable far into the tail instead of
    rounding t onto 1, and softens the algebraic endpoint singularity that
    a power-law tail leaves at u = 0.
    """
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    u = mid[:, None] + half[:, None] * _NODES[None, :]
    up = upper[:, None]
    live = ~up | (u >= _U_MIN)
    uu = np.where(live, u, 0.5)
    with np.errstate(divide="ignore", over="ignore"):
        s = uu * uu
        x = np.where(up, (1.0 - s) / s, uu / (1.0 - uu))
        jac = np.where(up, 2.0 / (s * uu), 1.0 / ((1.0 - uu) ** 2))
    x = np.where(live, x, 1.0)
    jac = np.where(live, jac, 0.0)
    vals = np.asarray(f(x.ravel()), dtype=float)
    scalar = vals.ndim == 1
    if scalar:
        vals = vals[None, :]
    vals = vals.reshape(vals.shape[0], *u.shape)
    vals = np.where(jac[None] > 0, vals * jac[None], 0.0)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand is not finite at a quadrature node")
    kron = vals @ _KRONROD * half[None, :]
    gauss = vals @ _GAUSS * half[None, :]
    return kron, np.abs(kron - gauss), scalar


def integrate_semi_infinite(f: Callable[[np.ndarray], np.ndarray],
                            abs_tol: float = 1e-10, rel_tol: float = 1e-8,
                            max_intervals: int = 4000,
                            initial_intervals: int = 8) -> QuadratureResult:
    """Integrate a vectorized ``f`` over (0, inf).

    The half line is mapped onto (0, 1) through x = t / (1 - t) and the
    result is refined by globally adaptive bisection with a 10/21-point
    Gauss-Kronrod pair.  The half t > 1/2 is parametrized by
    u = sqrt(1 - t) so that heavy tails are followed out to x = 1e150.  ``f`` receives a 1-d array
    of abscissae and may return either an array of the same length or an
    (m, n) array, in which case m integrals are computed together and the
    tolerance must hold for each component.
    """
    if abs_tol <= 0 and rel_tol <= 0:
        raise DomainError("at least one tolerance must be positive")
    per_side = max(1, initial_intervals // 2)
    edges = np.linspace(0.0, 0.5, per_side + 1)
    u_edges = np.linspace(0.0, _U_MAX, per_side + 1)
    lo = np.concatenate([edges[:-1], u_edges[:-1]])
    hi = np.concatenate([edges[1:], u_edges[1:]])
    upper = np.repeat([False, True], per_side)
    res, err, scalar = _gk_rule(f, lo, hi, upper)
    evaluations = lo.size * _NODES.size
    # parallel lists of live intervals
    lo, hi, upper = list(lo), list(hi), list(upper)
    res_cols = [res[:, i] for i in range(res.shape[1])]
    err_cols = [err[:, i] for i in range(err.shape[1])]
    while True:
        total = np.sum(res_cols, axis=0)
        total_err = np.sum(err_cols, axis=0)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            break
        if len(lo) >= max_intervals:
            raise QuadratureError(
                f"quadrature did not reach tolerance within {max_intervals} intervals",
                estimate=float(total[0]) if scalar else total,
                abs_error=float(total_err[0]) if scalar else total_err,
            )
        scaled = [float(np.max(e / tol)) for e in err_cols]
        order = heapq.nlargest(min(64, len(scaled)), range(len(scaled)), key=scaled.__getitem__)
        remaining = sum(scaled)
        picked = []
        for i in order:
            if remaining <= 0.5 and picked:
                break
            picked.append(i)
            remaining -= scaled[i]
        a = np.array([lo[i] for i in picked])
        b = np.array([hi[i] for i in picked])
        side = np.array([upper[i] for i in picked])
        m = 0.5 * (a + b)
        new_lo = np.concatenate([a, m])
        new_hi = np.concatenate([m, b])
        new_up = np.concatenate([side, side])
        r, e, _ = _gk_rule(f, new_lo, new_hi, new_up)
        evaluations += new_lo.size * _NODES.size
        for i in sorted(picked, reverse=True):
            del lo[i], hi[i], upper[i], res_cols[i], err_cols[i]
        lo.extend(new_lo)
        hi.extend(new_hi)
        upper.extend(new_up)
        res_cols.extend(r[:, j] for j in range(r.shape[1]))
        err_cols.extend(e[:, j] for j in range(e.shape[1]))
    if scalar:
        return QuadratureResult(float(total[0]), float(total_err[0]), evaluations)
    return QuadratureResult(total, total_err, evaluations)
