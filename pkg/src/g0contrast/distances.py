"""Symmetrized (h, phi) distances between two G0 laws.

Every kind can be evaluated by quadrature, which is the reference path.
Kullback-Leibler, Renyi, Hellinger and Bhattacharyya also have closed forms
in terms of gamma, digamma and hypergeometric functions; under
``EvalMethod.AUTO`` those are used whenever their series converge and no
csc() factor is near a pole, and quadrature is used otherwise.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DomainError, PoleError, UnsupportedRegionError
from .model import G0Params, g0_log_pdf, log_normalizer
from .special import digamma, gauss_2f1, hyp_3f2, integrate_semi_infinite, log_gamma_signed

__all__ = [
    "DistanceKind",
    "EvalMethod",
    "ClosedFormConstants",
    "KULLBACK_LEIBLER",
    "HELLINGER",
    "BHATTACHARYYA",
    "JENSEN_SHANNON",
    "ARITHMETIC_GEOMETRIC",
    "TRIANGULAR",
    "HARMONIC_MEAN",
    "RENYI",
    "ALL_KINDS",
    "renyi",
    "parse_kind",
    "divergence_hphi",
    "distance",
    "distances",
    "closed_form_distance",
    "distance_curve",
    "write_curve_csv",
    "DEFAULT_RENYI_BETA",
    "CURVE_REFERENCE",
]

DEFAULT_RENYI_BETA = 0.95
POLE_TOL = 1e-6
_SERIES_TOL = 1e-13
_EPS = 2.2e-16
# closed forms only claim support where their error bound is below this
_CLOSED_REL_TOL = 1e-7
_CLOSED_ABS_TOL = 1e-9
QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-10
_LOG2 = math.log(2.0)

_NAMES = {
    "kullback_leibler": "KL",
    "renyi": "R",
    "hellinger": "H",
    "bhattacharyya": "B",
    "jensen_shannon": "JS",
    "arithmetic_geometric": "AG",
    "triangular": "T",
    "harmonic_mean": "HM",
}
_CLOSED = {"kullback_leibler", "renyi", "hellinger", "bhattacharyya"}
# kinds whose phi satisfies x * phi(1/x) == phi(x): both directions coincide
_SELF_DUAL = {"hellinger", "bhattacharyya", "triangular", "harmonic_mean"}


@dataclass(frozen=True)
class DistanceKind:
    """One of the eight distances; ``beta`` is the Renyi order and unused otherwise."""

    name: str
    beta: float | None = None

    def __post_init__(self):
        if self.name not in _NAMES:
            raise DomainError(f"unknown distance {self.name!r}")
        if self.name == "renyi":
            beta = DEFAULT_RENYI_BETA if self.beta is None else float(self.beta)
            if not 0 < beta < 1:
                raise DomainError(f"Renyi order must lie in (0, 1), got {beta!r}")
            object.__setattr__(self, "beta", beta)
        elif self.beta is not None:
            raise DomainError(f"{self.name} takes no order parameter")

    @property
    def label(self) -> str:
        return _NAMES[self.name]

    @property
    def has_closed_form(self) -> bool:
        return self.name in _CLOSED

    def __str__(self):
        return self.label


def renyi(beta: float = DEFAULT_RENYI_BETA) -> DistanceKind:
    return DistanceKind("renyi", beta)


KULLBACK_LEIBLER = DistanceKind("kullback_leibler")
RENYI = renyi()
HELLINGER = DistanceKind("hellinger")
BHATTACHARYYA = DistanceKind("bhattacharyya")
JENSEN_SHANNON = DistanceKind("jensen_shannon")
ARITHMETIC_GEOMETRIC = DistanceKind("arithmetic_geometric")
TRIANGULAR = DistanceKind("triangular")
HARMONIC_MEAN = DistanceKind("harmonic_mean")
ALL_KINDS = (KULLBACK_LEIBLER, RENYI, HELLINGER, BHATTACHARYYA,
             JENSEN_SHANNON, ARITHMETIC_GEOMETRIC, TRIANGULAR, HARMONIC_MEAN)


def parse_kind(text: str, beta: float | None = None) -> DistanceKind:
    """Parse "KL", "hellinger", "R", "renyi:0.8", ... into a DistanceKind."""
    raw = text.strip()
    if ":" in raw:
        raw, b = raw.split(":", 1)
        beta = float(b)
    key = raw.lower().replace("-", "_")
    for name, label in _NAMES.items():
        if key in (name, label.lower()):
            if name == "renyi":
                return renyi(DEFAULT_RENYI_BETA if beta is None else beta)
            return DistanceKind(name)
    raise DomainError(f"unknown distance {text!r}; expected one of {', '.join(_NAMES.values())}")


class EvalMethod(enum.Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed"
    AUTO = "auto"


# --------------------------------------------------------------------------
# (h, phi) definitions
# --------------------------------------------------------------------------

def phi(kind: DistanceKind, x):
    """Convex generator phi(x) of the divergence."""
    x = np.asarray(x, dtype=float)
    n = kind.name
    if n == "kullback_leibler":
        return x * np.log(x)
    if n == "renyi":
        b = kind.beta
        return (x ** b - b * (x - 1.0) - 1.0) / (b - 1.0)
    if n == "hellinger":
        return (np.sqrt(x) - 1.0) ** 2
    if n == "bhattacharyya":
        return -np.sqrt(x) + (x + 1.0) / 2.0
    if n == "jensen_shannon":
        return x * np.log(2.0 * x / (x + 1.0))
    if n == "arithmetic_geometric":
        return (x + 1.0) / 2.0 * np.log((x + 1.0) / (2.0 * x))
    return (x - 1.0) ** 2 / (x + 1.0)


def h(kind: DistanceKind, y: float) -> float:
    """Outer transform h applied to the integral of phi(f_X/f_Y) f_Y."""
    n = kind.name
    if n == "renyi":
        b = kind.beta
        arg = (b - 1.0) * y + 1.0
        if not arg > 0:
            raise DomainError(f"Renyi h is undefined at y={y!r}")
        return math.log(arg) / (b - 1.0)
    if n == "hellinger":
        return y / 2.0
    if n == "bhattacharyya":
        if not y < 1:
            raise DomainError(f"Bhattacharyya h is undefined at y={y!r}")
        return -math.log1p(-y)
    if n == "harmonic_mean":
        if not y < 2:
            raise DomainError(f"harmonic-mean h is undefined at y={y!r}")
        return -math.log1p(-y / 2.0)
    return y


def _perspective(kind: DistanceKind, l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    """f2 * phi(f1 / f2) from log densities, evaluated without overflow.

    The perspective is 1-homogeneous in (f1, f2), so both densities are
    divided by the larger one and the common factor restored at the end.
    Points where both densities underflow contribute zero.
    """
    m = np.maximum(l1, l2)
    scale = np.exp(m)
    d1 = l1 - m
    d2 = l2 - m
    e1 = np.exp(d1)
    e2 = np.exp(d2)
    n = kind.name
    if n == "kullback_leibler":
        core = e1 * (d1 - d2)
    elif n == "renyi":
        b = kind.beta
        core = (np.exp(b * d1 + (1.0 - b) * d2) - b * e1 - (1.0 - b) * e2) / (b - 1.0)
    elif n == "hellinger":
        core = (np.sqrt(e1) - np.sqrt(e2)) ** 2
    elif n == "bhattacharyya":
        core = -np.exp(0.5 * (d1 + d2)) + 0.5 * (e1 + e2)
    elif n == "jensen_shannon":
        core = e1 * (_LOG2 + d1 - np.log(e1 + e2))
    elif n == "arithmetic_geometric":
        core = 0.5 * (e1 + e2) * (np.log(e1 + e2) - _LOG2 - d1)
    else:
        core = (e1 - e2) ** 2 / (e1 + e2)
    out = scale * core
    return np.where(scale > 0, np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0), 0.0)


def _common_scale(p1: G0Params, p2: G0Params) -> float:
    # typical magnitude of each law is about gamma / |alpha|
    return math.sqrt(p1.gamma / -p1.alpha * p2.gamma / -p2.alpha)


# kinds with an overlap integral O (Bhattacharyya coefficient, Renyi or
# harmonic-mean overlap) that determines them: it is also integrated directly,
# since for nearly disjoint laws O is small and known to full relative
# accuracy while 1 - O is not
_OVERLAP = {"renyi", "hellinger", "bhattacharyya", "triangular", "harmonic_mean"}


def _overlap(kind: DistanceKind, l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    if kind.name == "renyi":
        return np.exp(kind.beta * l1 + (1.0 - kind.beta) * l2)
    if kind.name in ("hellinger", "bhattacharyya"):
        return np.exp(0.5 * (l1 + l2))
    m = np.maximum(l1, l2)
    e1, e2 = np.exp(l1 - m), np.exp(l2 - m)
    return np.exp(m) * 2.0 * e1 * e2 / (e1 + e2)


def _from_overlap(kind: DistanceKind, o: float) -> float:
    n = kind.name
    if n == "hellinger":
        return 1.0 - o
    if n == "triangular":
        return 2.0 * (1.0 - o)
    log_o = math.log(max(o, 1e-300))
    return log_o / (kind.beta - 1.0) if n == "renyi" else -log_o


def _integrate(components, p1: G0Params, p2: G0Params) -> list[float]:
    """Integrate ``components`` = [(integrand, forward?), ...] for the pair.

    Each integrand maps (log f_X, log f_Y) to values; ``forward`` False swaps
    the roles of p1 and p2.  Both laws are first divided by a common scale,
    which leaves every distance unchanged and centres the mass near x = 1.
    """
    s = _common_scale(p1, p2)
    q1, q2 = p1.scaled(1.0 / s), p2.scaled(1.0 / s)

    def integrand(x):
        l1 = g0_log_pdf(x, q1)
        l2 = g0_log_pdf(x, q2)
        return np.vstack([g(l1, l2) if fwd else g(l2, l1) for g, fwd in components])

    res = integrate_semi_infinite(integrand, abs_tol=QUAD_ABS_TOL, rel_tol=QUAD_REL_TOL)
    return [float(v) for v in np.atleast_1d(res.value)]


def _directional_components(kind: DistanceKind, forward: bool) -> list:
    comps = [(lambda l1, l2, k=kind: _perspective(k, l1, l2), forward)]
    if kind.name in _OVERLAP:
        comps.append((lambda l1, l2, k=kind: _overlap(k, l1, l2), forward))
    return comps


def _directional_value(kind: DistanceKind, values) -> float:
    y = next(values)
    if kind.name not in _OVERLAP:
        return h(kind, y)
    o = next(values)
    return _from_overlap(kind, o) if o < 0.5 else h(kind, y)


def divergence_hphi(kind: DistanceKind, p1: G0Params, p2: G0Params) -> float:
    """One-directional divergence D(p1, p2) = h(integral of phi(f1/f2) f2), by quadrature."""
    values = iter(_integrate(_directional_components(kind, True), p1, p2))
    return _directional_value(kind, values)


def _quadrature_distances(kinds: Sequence[DistanceKind], p1: G0Params, p2: G0Params) -> dict:
    components = []
    for k in kinds:
        components += _directional_components(k, True)
        if k.name not in _SELF_DUAL:
            components += _directional_components(k, False)
    values = iter(_integrate(components, p1, p2))
    out = {}
    for k in kinds:
        d12 = _directional_value(k, values)
        if k.name in _SELF_DUAL:
            out[k] = d12
        else:
            out[k] = 0.5 * (d12 + _directional_value(k, values))
    return out


# --------------------------------------------------------------------------
# Closed forms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormConstants:
    """Ingredients of the closed-form distances for a parameter pair.

    With f_i(x) = k_i x^(a_i) (b_i + L_i x)^(-c_i):
    k_i normalizing constants (``log_k*`` kept to avoid overflow), a_i = L_i - 1,
    b_i = gamma_i, c_i = |alpha_i| + L_i and d = log(k2 / k1).
    (h1, g1, e1, e2) describe the integral of f1^(1-beta) f2^beta,
    (h2, g2, m1, m2) that of f1^beta f2^(1-beta), and f_i = (alpha_i - L_i)/2
    are the exponents of the Bhattacharyya coefficient integral.
    """

    log_k1: float
    log_k2: float
    a1: float
    a2: float
    b1: float
    b2: float
    c1: float
    c2: float
    d: float
    beta: float
    log_h1: float
    log_h2: float
    g1: float
    g2: float
    e1: float
    e2: float
    m1: float
    m2: float
    f1: float
    f2: float
    L1: float
    L2: float

    @property
    def k1(self) -> float:
        return _safe_exp(self.log_k1)

    @property
    def k2(self) -> float:
        return _safe_exp(self.log_k2)

    @property
    def h1(self) -> float:
        return _safe_exp(self.log_h1)

    @property
    def h2(self) -> float:
        return _safe_exp(self.log_h2)

    @classmethod
    def from_params(cls, p1: G0Params, p2: G0Params, beta: float = DEFAULT_RENYI_BETA):
        lk1, lk2 = log_normalizer(p1), log_normalizer(p2)
        return cls(
            log_k1=lk1, log_k2=lk2,
            a1=p1.looks - 1.0, a2=p2.looks - 1.0,
            b1=p1.gamma, b2=p2.gamma,
            c1=-p1.alpha + p1.looks, c2=-p2.alpha + p2.looks,
            d=lk2 - lk1,
            beta=beta,
            log_h1=beta * lk2 + (1.0 - beta) * lk1,
            log_h2=beta * lk1 + (1.0 - beta) * lk2,
            g1=(p1.looks - 1.0) * (1.0 - beta) + (p2.looks - 1.0) * beta,
            g2=(p1.looks - 1.0) * beta + (p2.looks - 1.0) * (1.0 - beta),
            e1=(p1.alpha - p1.looks) * (1.0 - beta),
            e2=(p2.alpha - p2.looks) * beta,
            m1=(p1.alpha - p1.looks) * beta,
            m2=(p2.alpha - p2.looks) * (1.0 - beta),
            f1=(p1.alpha - p1.looks) / 2.0,
            f2=(p2.alpha - p2.looks) / 2.0,
            L1=p1.looks, L2=p2.looks,
        )


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _log_product_integral(a, b1, n1, c1, b2, n2, c2) -> tuple[float, float]:
    """log of the integral over (0, inf) of x^a (b1 + n1 x)^c1 (b2 + n2 x)^c2.

    Evaluated with the two-term 2F1 connection formula carrying a
    pi * csc((c2 + a) pi) factor; the orientation is chosen so that the
    hypergeometric argument b2 n1 / (b1 n2) is below one.  Returns the value
    and a bound on its absolute error, which grows with the cancellation
    between the two terms.
    """
    if not (a > -1 and -1 - c1 - c2 - a > 0):
        raise DomainError("product integral diverges for these exponents")
    z = b2 * n1 / (b1 * n2)
    if z > 1.0:
        b1, n1, c1, b2, n2, c2 = b2, n2, c2, b1, n1, c1
        z = 1.0 / z
    if z >= 1.0:
        raise UnsupportedRegionError("hypergeometric argument equals one")
    nu = c2 + a
    if abs(nu - round(nu)) < POLE_TOL:
        raise PoleError(f"csc((c2 + a) pi) is singular: c2 + a = {nu!r}")
    f1 = gauss_2f1(-c2, -1 - c1 - c2 - a, -c2 - a, z, rel_tol=_SERIES_TOL)
    f2 = gauss_2f1(-c1, 1 + a, 2 + c2 + a, z, rel_tol=_SERIES_TOL)
    # term 1: -(n1/b1)^(-1-c2-a) (n2/b2)^c2 G(-1-c1-c2-a) / (G(-c1) G(-c2-a)) * F1
    s_a, lg_a = log_gamma_signed(-c2 - a)
    l1 = ((-1 - c2 - a) * math.log(n1 / b1) + c2 * math.log(n2 / b2)
          + math.lgamma(-1 - c1 - c2 - a) - math.lgamma(-c1) - lg_a)
    # term 2: (n2/b2)^(-1-a) G(1+a) / (G(-c2) G(2+c2+a)) * F2
    s_b, lg_b = log_gamma_signed(2 + c2 + a)
    l2 = (-1 - a) * math.log(n2 / b2) + math.lgamma(1 + a) - math.lgamma(-c2) - lg_b
    top = max(l1, l2)
    t1 = -s_a * math.exp(l1 - top) * f1
    t2 = s_b * math.exp(l2 - top) * f2
    total = t1 + t2
    scale_terms = max(abs(t1), abs(t2))
    if abs(total) < 1e-9 * scale_terms:
        raise UnsupportedRegionError("connection formula lost precision to cancellation")
    s = math.sin(nu * math.pi)
    if (total > 0) != (s > 0):
        raise UnsupportedRegionError("connection formula produced a nonpositive integral")
    value = (c1 * math.log(b1) + c2 * math.log(b2) + math.log(math.pi)
             - math.log(abs(s)) + top + math.log(abs(total)))
    # series truncation and rounding in the log-gamma sums, amplified by cancellation
    rounding = _EPS * (abs(l1) + abs(l2) + abs(value) + 1.0)
    err = (_SERIES_TOL + rounding) * scale_terms / abs(total)
    return value, err


def _log_bhattacharyya_coefficient(c: ClosedFormConstants) -> tuple[float, float]:
    v, err = _log_product_integral(0.5 * (c.a1 + c.a2), c.b1, c.L1, c.f1, c.b2, c.L2, c.f2)
    return 0.5 * (c.log_k1 + c.log_k2) + v, err + _EPS * abs(c.log_k1 + c.log_k2)


def _expected_log_x(p: G0Params) -> float:
    return math.log(p.gamma / p.looks) + digamma(p.looks) - digamma(-p.alpha)


def _expected_log_linear(p: G0Params, gamma_i: float, looks_i: float) -> float:
    """E[log(gamma_i + looks_i Z)] for Z ~ G0(p).

    With U = L Z / gamma ~ beta-prime(L, -alpha) and T = U/(1+U) ~ Beta(L, -alpha),
    log(1 + rho U) = log(1 - (1 - rho) T) - log(1 - T); the first expectation
    is a 3F2 series at 1 - rho (or, for rho > 1, at 1 - 1/rho after T -> 1 - T).
    """
    pp, qq = p.looks, -p.alpha
    rho = looks_i * p.gamma / (p.looks * gamma_i)
    e_log_1mt = digamma(qq) - digamma(pp + qq)
    if rho <= 1.0:
        z = 1.0 - rho
        e_num = -z * pp / (pp + qq) * hyp_3f2(1.0, 1.0, pp + 1.0, 2.0, pp + qq + 1.0, z,
                                               rel_tol=_SERIES_TOL)
        shift = 0.0
    else:
        z = 1.0 - 1.0 / rho
        e_num = -z * qq / (pp + qq) * hyp_3f2(1.0, 1.0, qq + 1.0, 2.0, pp + qq + 1.0, z,
                                               rel_tol=_SERIES_TOL)
        shift = math.log(rho)
    return math.log(gamma_i) + shift + e_num - e_log_1mt


def _expected_log_density(p_j: G0Params, p_i: G0Params) -> tuple[float, float]:
    """E_j[log f_i(Z)] and the sum of magnitudes of its parts."""
    parts = (log_normalizer(p_i),
             (p_i.looks - 1.0) * _expected_log_x(p_j),
             (p_i.alpha - p_i.looks) * _expected_log_linear(p_j, p_i.gamma, p_i.looks))
    return math.fsum(parts), sum(abs(v) for v in parts)


def _require_accuracy(value: float, err: float, kind: DistanceKind) -> float:
    if not err <= min(_CLOSED_REL_TOL * abs(value), _CLOSED_ABS_TOL):
        raise UnsupportedRegionError(
            f"closed-form {kind.label} is not accurate enough here (|d|={abs(value):.3g}, error <= {err:.3g})")
    return value


def closed_form_distance(kind: DistanceKind, p1: G0Params, p2: G0Params) -> float:
    """Closed-form symmetrized distance.

    Raises UnsupportedRegionError at poles, outside the convergent region of
    the series, or where the propagated error bound exceeds 1e-7 of the
    result or 1e-9 in absolute terms.
    """
    if not kind.has_closed_form:
        raise UnsupportedRegionError(f"no closed form for {kind.label}")
    if p1 == p2:
        return 0.0
    n = kind.name
    if n == "kullback_leibler":
        terms = [_expected_log_density(p1, p1), _expected_log_density(p1, p2),
                 _expected_log_density(p2, p2), _expected_log_density(p2, p1)]
        d = 0.5 * (terms[0][0] - terms[1][0] + terms[2][0] - terms[3][0])
        err = _SERIES_TOL * sum(m for _, m in terms)
        return _require_accuracy(d, err, kind)
    c = ClosedFormConstants.from_params(p1, p2, kind.beta or DEFAULT_RENYI_BETA)
    if n in ("hellinger", "bhattacharyya"):
        log_bc, err = _log_bhattacharyya_coefficient(c)
        if n == "hellinger":
            # gated on the log-scale bound, like B, so both take the same path
            _require_accuracy(-log_bc, err, kind)
            return -math.expm1(log_bc)
        return _require_accuracy(-log_bc, err, kind)
    # Renyi: average of log(int f1^(1-b) f2^b) and log(int f1^b f2^(1-b)), over (b - 1)
    v21, e21 = _log_product_integral(c.g1, c.b1, c.L1, c.e1, c.b2, c.L2, c.e2)
    v12, e12 = _log_product_integral(c.g2, c.b1, c.L1, c.m1, c.b2, c.L2, c.m2)
    log_i21, log_i12 = c.log_h1 + v21, c.log_h2 + v12
    d = 0.5 * (log_i21 + log_i12) / (c.beta - 1.0)
    err = (e21 + e12 + _EPS * (abs(c.log_h1) + abs(c.log_h2))) / (2.0 * (1.0 - c.beta))
    return _require_accuracy(d, err, kind)


# --------------------------------------------------------------------------
# Public entry points
# --------------------------------------------------------------------------

def distances(kinds: Iterable[DistanceKind], p1: G0Params, p2: G0Params,
              method: EvalMethod = EvalMethod.AUTO) -> dict:
    """Several symmetrized distances at once, sharing one quadrature pass."""
    kinds = list(dict.fromkeys(kinds))
    method = EvalMethod(method)
    out = {}
    pending = []
    for k in kinds:
        if method is EvalMethod.QUADRATURE:
            pending.append(k)
            continue
        if method is EvalMethod.CLOSED_FORM:
            out[k] = closed_form_distance(k, p1, p2)
            continue
        if k.has_closed_form:
            try:
                out[k] = closed_form_distance(k, p1, p2)
                continue
            except UnsupportedRegionError:
                pass
        pending.append(k)
    if pending:
        if p1 == p2:
            out.update({k: 0.0 for k in pending})
        else:
            out.update(_quadrature_distances(pending, p1, p2))
    return {k: out[k] for k in kinds}


def distance(kind: DistanceKind, p1: G0Params, p2: G0Params,
             method: EvalMethod = EvalMethod.AUTO) -> float:
    """Symmetrized distance (D(p1, p2) + D(p2, p1)) / 2."""
    return distances([kind], p1, p2, method)[kind]


CURVE_REFERENCE = G0Params(-12.0, 11.0, 8.0)


def distance_curve(kind: DistanceKind, alpha_grid: Iterable[float],
                   reference: G0Params = CURVE_REFERENCE,
                   method: EvalMethod = EvalMethod.AUTO) -> list[tuple[float, float]]:
    """Distance from unit-mean G0(alpha, -alpha-1, L) to ``reference`` along ``alpha_grid``."""
    rows = []
    for a in alpha_grid:
        a = float(a)
        if not a < -1:
            raise DomainError(f"curve needs alpha < -1, got {a!r}")
        p = G0Params(a, -a - 1.0, reference.looks)
        rows.append((a, distance(kind, p, reference, method)))
    return rows


def write_curve_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["alpha", "distance"])
    for a, d in rows:
        w.writerow([repr(float(a)), repr(float(d))])
