"""The G0 law for multilook intensity speckle.

A return is modelled as Z = X * Y with X reciprocal-gamma backscatter
(roughness ``alpha`` < 0, scale ``gamma`` > 0) and Y ~ Gamma(L, L) speckle.
The number of looks L may be non-integer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

__all__ = [
    "G0Params",
    "Sample",
    "g0_log_pdf",
    "g0_pdf",
    "log_normalizer",
    "g0_moment",
    "mu_from_params",
    "gamma_from_mean",
    "sample_g0",
    "make_rng",
]


@dataclass(frozen=True)
class G0Params:
    """Roughness, scale and number of looks of a G0 law."""

    alpha: float
    gamma: float
    looks: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "gamma", "looks"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if not self.alpha < 0:
            raise DomainError(f"alpha must be negative, got {self.alpha!r}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")
        if not self.looks >= 1:
            raise DomainError(f"looks must be >= 1, got {self.looks!r}")

    def scaled(self, c: float) -> "G0Params":
        """Law of c * Z."""
        return G0Params(self.alpha, self.gamma * c, self.looks)

    @property
    def mean(self) -> float:
        return mu_from_params(self)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.gamma, self.looks)


@dataclass(frozen=True)
class Sample:
    """Positive intensities sharing a known number of looks."""

    values: np.ndarray = field(repr=False)
    looks: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 1:
            raise DomainError("a sample needs at least one observation")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            bad = int(np.flatnonzero(~(np.isfinite(v) & (v > 0)))[0])
            raise DomainError(f"sample values must be finite and positive (index {bad}: {v[bad]!r})")
        if not float(self.looks) >= 1:
            raise DomainError(f"looks must be >= 1, got {self.looks!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "looks", float(self.looks))

    def __len__(self) -> int:
        return self.values.size

    def scaled(self, c: float) -> "Sample":
        return Sample(self.values * c, self.looks)


def log_normalizer(p: G0Params) -> float:
    """log of L^L Gamma(L - alpha) / (gamma^alpha Gamma(-alpha) Gamma(L))."""
    a, g, L = p.alpha, p.gamma, p.looks
    return L * math.log(L) + math.lgamma(L - a) - a * math.log(g) - math.lgamma(-a) - math.lgamma(L)


def g0_log_pdf(z, p: G0Params):
    """Log density of G0(alpha, gamma, L) at z > 0 (scalar or array).

    Written as L log(L/gamma) + lgamma(L-alpha) - lgamma(-alpha) - lgamma(L)
    + (L-1) log z + (alpha-L) log1p(L z / gamma) so that large |alpha| and
    large gamma do not cancel catastrophically.
    """
    a, g, L = p.alpha, p.gamma, p.looks
    zz = np.asarray(z, dtype=float)
    if np.any(~(zz > 0)):
        raise DomainError("the G0 density is defined for z > 0 only")
    const = L * math.log(L / g) + math.lgamma(L - a) - math.lgamma(-a) - math.lgamma(L)
    out = const + (L - 1.0) * np.log(zz) + (a - L) * np.log1p(L * zz / g)
    return float(out) if out.ndim == 0 else out


def g0_pdf(z, p: G0Params):
    return np.exp(g0_log_pdf(z, p))


def g0_moment(r: float, p: G0Params) -> float:
    """E[Z^r]; ``math.inf`` when the moment does not exist (alpha >= -r)."""
    if not r > 0:
        raise DomainError(f"moment order must be positive, got {r!r}")
    a, g, L = p.alpha, p.gamma, p.looks
    if not -r > a:
        return math.inf
    return math.exp(
        r * math.log(g / L)
        + math.lgamma(-a - r) - math.lgamma(-a)
        + math.lgamma(L + r) - math.lgamma(L)
    )


def mu_from_params(p: G0Params) -> float:
    """Mean -gamma / (1 + alpha), or ``math.inf`` when alpha >= -1."""
    if p.alpha >= -1:
        return math.inf
    return -p.gamma / (1.0 + p.alpha)


def gamma_from_mean(alpha: float, mu: float) -> float:
    """Scale giving mean ``mu`` at roughness ``alpha`` (inverse of mu_from_params)."""
    if not alpha < -1:
        raise DomainError(f"the mean exists only for alpha < -1, got {alpha!r}")
    if not mu > 0:
        raise DomainError(f"mean must be positive, got {mu!r}")
    return -(1.0 + alpha) * mu


def make_rng(*seed: int) -> np.random.Generator:
    """PCG64 generator keyed by one or more nonnegative integers.

    ``make_rng(master, rep, idx)`` gives streams that are independent of
    the order in which replications are evaluated.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(s) for s in seed])))


def sample_g0(p: G0Params, n: int, seed) -> Sample:
    """Draw ``n`` G0 intensities as (1 / W) * Y.

    W ~ Gamma(shape=-alpha, rate=gamma) so 1/W is the reciprocal-gamma
    backscatter, and Y ~ Gamma(shape=L, rate=L).  ``seed`` is an int, a
    tuple of ints (see :func:`make_rng`) or a ``numpy.random.Generator``.
    """
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n!r}")
    if isinstance(seed, np.random.Generator):
        rng = seed
    elif isinstance(seed, (tuple, list)):
        rng = make_rng(*seed)
    else:
        rng = make_rng(seed)
    w = rng.gamma(-p.alpha, 1.0 / p.gamma, size=n)
    y = rng.gamma(p.looks, 1.0 / p.looks, size=n)
    return Sample(y / w, p.looks)
