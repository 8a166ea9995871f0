"""Monte Carlo estimation of the size and power of the distance-based tests.

Each replication draws two samples, fits both by maximum likelihood, keeps
the pair only if both estimates survive censoring, and then evaluates every
requested distance on that same fitted pair.  Replication ``r`` draws its
samples from streams keyed by ``(seed, r, 0)`` and ``(seed, r, 1)``, so the
result does not depend on how replications are scheduled.
"""
from __future__ import annotations

import csv
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distances import (ALL_KINDS, ARITHMETIC_GEOMETRIC, BHATTACHARYYA, KULLBACK_LEIBLER,
                        TRIANGULAR, DistanceKind, EvalMethod, distances)
from .estimation import censor_accept, fit_ml
from .exceptions import DegenerateResultError, DomainError, G0Error
from .model import G0Params, sample_g0
from .testing import DEGREES_OF_FREEDOM, p_value, statistic_from_distance

__all__ = [
    "Scenario",
    "ScenarioSpec",
    "MCReport",
    "run_experiment",
    "run_sample_size_study",
    "preset",
    "PRESETS",
    "CELL_FIELDS",
    "SAMPLE_SIZE_KINDS",
    "write_reports_csv",
    "CSV_COLUMNS",
]

DEFAULT_LEVELS = (0.01, 0.05)
SAMPLE_SIZE_KINDS = (KULLBACK_LEIBLER, TRIANGULAR, BHATTACHARYYA, ARITHMETIC_GEOMETRIC)
CSV_COLUMNS = ["scenario", "alpha1", "gamma1", "alpha2", "gamma2", "L", "N", "kind", "level",
               "rejection_rate", "valid_reps", "attempted_reps"]
_CHUNK = 32


class Scenario(enum.Enum):
    NULL = "null"
    EQUAL_ALPHA = "equal_alpha"
    EQUAL_MU = "equal_mu"
    BOTH_DIFFER_III = "both_differ_iii"
    BOTH_DIFFER_IV = "both_differ_iv"


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=0.0)


@dataclass(frozen=True)
class ScenarioSpec:
    """One Monte Carlo configuration.

    ``window`` is the size N of each of the two samples and ``max_reps`` the
    number of replications attempted (valid or not).
    """

    scenario: Scenario
    params1: G0Params
    params2: G0Params
    window: int = 49
    levels: tuple = DEFAULT_LEVELS
    max_reps: int = 5500
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.window < 3:
            raise DomainError(f"window must be >= 3, got {self.window}")
        if self.max_reps < 1:
            raise DomainError(f"max_reps must be >= 1, got {self.max_reps}")
        if not self.levels or not all(0 < v < 1 for v in self.levels):
            raise DomainError(f"levels must lie in (0, 1), got {self.levels}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit nonnegative integer")
        p1, p2 = self.params1, self.params2
        if p1.looks != p2.looks:
            raise DomainError("both laws must share the number of looks")
        sc = self.scenario
        if sc is Scenario.NULL:
            ok = p1 == p2
        elif sc is Scenario.EQUAL_ALPHA:
            ok = p1.alpha == p2.alpha and p1.gamma != p2.gamma
        else:
            if p1.alpha >= -1 or p2.alpha >= -1:
                raise DomainError(f"{sc.value} needs alpha < -1 so that the means exist")
            ratio = p1.gamma / p2.gamma
            kappa = self.kappa
            if sc is Scenario.EQUAL_MU:
                ok = p1.alpha != p2.alpha and _close(ratio, kappa)
            elif sc is Scenario.BOTH_DIFFER_III:
                ok = p1.alpha < p2.alpha and ratio > kappa and not _close(ratio, kappa)
            else:
                ok = p1.alpha < p2.alpha and ratio < kappa and not _close(ratio, kappa)
        if not ok:
            raise DomainError(f"parameters {p1.as_tuple()} / {p2.as_tuple()} do not satisfy {sc.value}")

    @property
    def kappa(self) -> float:
        """(1 + alpha1) / (1 + alpha2)."""
        return (1.0 + self.params1.alpha) / (1.0 + self.params2.alpha)


@dataclass(frozen=True)
class MCReport:
    """Rejection counts per (kind, level) over the valid replications.

    ``statistics`` holds S for each valid replication (rows, in replication
    order) and kind (columns, in ``kinds`` order).
    """

    spec: ScenarioSpec
    kinds: tuple
    valid_reps: int
    attempted_reps: int
    rejections: dict = field(repr=False)
    statistics: np.ndarray = field(repr=False)

    def rejection_rate(self, kind: DistanceKind, level: float) -> float:
        return self.rejections[kind, float(level)] / self.valid_reps

    def rows(self):
        sp = self.spec
        p1, p2 = sp.params1, sp.params2
        for k in self.kinds:
            for lv in sp.levels:
                yield {
                    "scenario": sp.scenario.value,
                    "alpha1": p1.alpha, "gamma1": p1.gamma,
                    "alpha2": p2.alpha, "gamma2": p2.gamma,
                    "L": p1.looks, "N": sp.window,
                    "kind": k.label, "level": lv,
                    "rejection_rate": self.rejection_rate(k, lv),
                    "valid_reps": self.valid_reps,
                    "attempted_reps": self.attempted_reps,
                }


def _replicate(spec: ScenarioSpec, kinds, method: EvalMethod, r: int):
    """Statistics for replication r, or None when it is not valid."""
    s1 = sample_g0(spec.params1, spec.window, (spec.seed, r, 0))
    s2 = sample_g0(spec.params2, spec.window, (spec.seed, r, 1))
    try:
        f1 = fit_ml(s1)
        f2 = fit_ml(s2)
    except G0Error:
        return None
    if not (censor_accept(f1, spec.params1.alpha) and censor_accept(f2, spec.params2.alpha)):
        return None
    try:
        d = distances(kinds, f1.params, f2.params, method)
    except G0Error:
        return None
    n = spec.window
    return [statistic_from_distance(k, d[k], n, n) for k in kinds]


def _run_chunk(spec, kinds, method, reps):
    return [(r, _replicate(spec, kinds, method, r)) for r in reps]


def run_experiment(spec: ScenarioSpec, kinds: Sequence[DistanceKind] = ALL_KINDS,
                   target_valid: int | None = None, workers: int = 1,
                   method: EvalMethod = EvalMethod.QUADRATURE) -> MCReport:
    """Run the replications of ``spec`` and count rejections.

    Without ``target_valid`` all ``spec.max_reps`` replications are
    attempted.  With it, the report covers the shortest prefix of
    replications 0, 1, ... that contains ``target_valid`` valid ones (or all
    ``max_reps`` if there are fewer), which is the same whatever ``workers``.
    """
    kinds = tuple(dict.fromkeys(kinds))
    if not kinds:
        raise DomainError("at least one distance kind is required")
    if target_valid is not None and target_valid < 1:
        raise DomainError(f"target_valid must be >= 1, got {target_valid}")
    method = EvalMethod(method)
    results: dict[int, list | None] = {}
    wave = spec.max_reps if target_valid is None else max(4 * _CHUNK * workers, target_valid // 8)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        start = 0
        while start < spec.max_reps:
            stop = min(spec.max_reps, start + wave)
            reps = range(start, stop)
            if pool is None:
                results.update(_run_chunk(spec, kinds, method, reps))
            else:
                chunks = [reps[i:i + _CHUNK] for i in range(0, len(reps), _CHUNK)]
                for part in pool.map(_run_chunk, *zip(*[(spec, kinds, method, c) for c in chunks])):
                    results.update(part)
            start = stop
            if target_valid is not None and sum(v is not None for v in results.values()) >= target_valid:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    used = []
    attempted = 0
    for r in range(start):
        attempted = r + 1
        if results[r] is not None:
            used.append(results[r])
            if target_valid is not None and len(used) == target_valid:
                break
    if not used:
        raise DegenerateResultError(f"no valid replications out of {attempted} attempted")
    stats = np.array(used, dtype=float)
    rejections = {}
    for j, k in enumerate(kinds):
        pvals = [p_value(s, DEGREES_OF_FREEDOM) for s in stats[:, j]]
        for lv in spec.levels:
            rejections[k, lv] = sum(p <= lv for p in pvals)
    return MCReport(spec, kinds, len(used), attempted, rejections, stats)


def run_sample_size_study(alpha: float, looks: float, ratio: float, sizes: Sequence[int],
                          kinds: Sequence[DistanceKind] = SAMPLE_SIZE_KINDS,
                          levels=DEFAULT_LEVELS, max_reps: int = 5500, seed: int = 0,
                          target_valid: int | None = None, workers: int = 1,
                          method: EvalMethod = EvalMethod.QUADRATURE) -> list[tuple[int, MCReport]]:
    """Power against gamma_2 = ratio * gamma_1 (equal alpha) for each sample size."""
    if not sizes:
        raise DomainError("sizes must be nonempty")
    p1, p2 = _equal_alpha_pair(alpha, ratio, looks)
    out = []
    for n in sizes:
        spec = ScenarioSpec(Scenario.EQUAL_ALPHA, p1, p2, window=int(n), levels=levels,
                            max_reps=max_reps, seed=seed)
        out.append((int(n), run_experiment(spec, kinds, target_valid, workers, method)))
    return out


def _unit_mean_gamma(alpha: float) -> float:
    return -alpha - 1.0 if alpha < -1 else 1.0


def _equal_alpha_pair(alpha, ratio, looks):
    g1 = _unit_mean_gamma(alpha)
    return G0Params(alpha, g1, looks), G0Params(alpha, ratio * g1, looks)


# --------------------------------------------------------------------------
# Presets: the grids of the simulation study
# --------------------------------------------------------------------------

_LOOKS = (1.0, 2.0, 4.0, 8.0)
_NULL_GAMMAS = {-1.5: (0.5, 5.0), -3.0: (2.0, 20.0), -5.0: (4.0, 40.0), -8.0: (7.0, 70.0)}
_EQUAL_ALPHA_RATIOS = (2.0, 2.5, 5.0)
_EQUAL_MU_PAIRS = ((-1.5, -3.0), (-1.5, -5.0), (-1.5, -8.0), (-3.0, -8.0), (-3.0, -5.0), (-5.0, -8.0))
SAMPLE_SIZES = (49, 81, 121)


def _size_grid():
    for a, gammas in _NULL_GAMMAS.items():
        for g in gammas:
            for L in _LOOKS:
                p = G0Params(a, g, L)
                yield f"{a:g},{g:g},{L:g}", Scenario.NULL, p, p, 49


def _power_grid():
    for a in _NULL_GAMMAS:
        for ratio in _EQUAL_ALPHA_RATIOS:
            for L in _LOOKS:
                p1, p2 = _equal_alpha_pair(a, ratio, L)
                yield f"{a:g},{ratio:g},{L:g}", Scenario.EQUAL_ALPHA, p1, p2, 49


def _equal_mean_grid():
    for a1, a2 in _EQUAL_MU_PAIRS:
        for L in _LOOKS:
            # unit means: gamma_i = -(1 + alpha_i), so gamma_2 / gamma_1 = 1 / kappa
            p1 = G0Params(a1, -(1.0 + a1), L)
            p2 = G0Params(a2, -(1.0 + a2), L)
            yield f"{a1:g},{a2:g},{L:g}", Scenario.EQUAL_MU, p1, p2, 49


def _sample_size_grid():
    for a in _NULL_GAMMAS:
        for n in SAMPLE_SIZES:
            p1, p2 = _equal_alpha_pair(a, 2.0, 1.0)
            yield f"{a:g},{n}", Scenario.EQUAL_ALPHA, p1, p2, n


PRESETS = {"size": _size_grid, "power": _power_grid, "equal-mean": _equal_mean_grid,
           "sample-size": _sample_size_grid}
# what the comma-separated cell names list, per preset
CELL_FIELDS = {"size": "alpha,gamma,L", "power": "alpha,ratio,L", "equal-mean": "alpha1,alpha2,L",
               "sample-size": "alpha,N"}


def _cell_key(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise DomainError(f"cell must be comma-separated numbers, got {text!r}") from None


def preset(name: str, max_reps: int = 5500, seed: int = 0, levels=DEFAULT_LEVELS,
           cell: str | None = None):
    """List of (cell name, ScenarioSpec, kinds) for a named grid.

    ``cell`` (e.g. "-1.5,0.5,1" for the size preset) keeps only the matching configuration.
    """
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    kinds = SAMPLE_SIZE_KINDS if name == "sample-size" else ALL_KINDS
    cells = [(c, ScenarioSpec(sc, p1, p2, window=n, levels=levels, max_reps=max_reps, seed=seed), kinds)
             for c, sc, p1, p2, n in PRESETS[name]()]
    if cell is not None:
        key = _cell_key(cell)
        cells = [c for c in cells if _cell_key(c[0]) == key]
        if not cells:
            raise DomainError(f"no cell {cell!r} in preset {name} (fields: {CELL_FIELDS[name]})")
    return cells


def write_reports_csv(reports: Sequence[MCReport], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for rep in reports:
        for row in rep.rows():
            w.writerow(row)
