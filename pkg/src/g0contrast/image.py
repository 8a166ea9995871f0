"""Region contrast on intensity rasters.

Labelled rectangular regions are cut into disjoint square windows, each
window is fitted by maximum likelihood, and the distance tests are applied
to pairs of windows: pairs within one region estimate the size of the tests,
pairs across two regions their power.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .distances import ALL_KINDS, DistanceKind, EvalMethod, distances
from .estimation import FitResult, fit_ml, sanity_ok
from .exceptions import DegenerateResultError, DomainError, G0Error
from .model import Sample
from .testing import DEGREES_OF_FREEDOM, p_value, statistic_from_distance

__all__ = [
    "Raster",
    "RegionLabel",
    "WindowFit",
    "RateTable",
    "load_raster",
    "save_raster",
    "load_regions",
    "partition_windows",
    "fit_windows",
    "pairwise_rejection_rates",
    "write_rate_tables_csv",
    "RasterFormatError",
]

DEFAULT_SIDE = 7


class RasterFormatError(DomainError):
    """A raster or region file does not follow the documented text format."""


@dataclass(frozen=True)
class Raster:
    """Row-major grid of positive intensities with a known number of looks."""

    pixels: np.ndarray = field(repr=False)
    looks: float = 1.0

    def __post_init__(self):
        px = np.array(self.pixels, dtype=float)
        if px.ndim != 2 or px.size == 0:
            raise DomainError(f"pixels must be a nonempty 2-d array, got shape {px.shape}")
        bad = np.flatnonzero(~(np.isfinite(px) & (px > 0)))
        if bad.size:
            raise DomainError(f"pixel {int(bad[0])} is not a positive finite value: {px.flat[bad[0]]!r}")
        if not float(self.looks) >= 1:
            raise DomainError(f"looks must be >= 1, got {self.looks!r}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "looks", float(self.looks))

    @property
    def rows(self) -> int:
        return self.pixels.shape[0]

    @property
    def cols(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class RegionLabel:
    name: str
    row0: int
    col0: int
    height: int
    width: int

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise DomainError(f"region name must be a nonempty word, got {self.name!r}")
        if self.row0 < 0 or self.col0 < 0 or self.height < 1 or self.width < 1:
            raise DomainError(f"invalid extent for region {self.name!r}")


@dataclass(frozen=True)
class WindowFit:
    window_id: int
    region: str
    fit: FitResult | None
    size: int
    sane: bool


def load_raster(path, looks: float | None = None) -> Raster:
    """Read the text raster format: "rows cols looks" then rows*cols values.

    A ``looks`` argument overrides the value in the header, and makes the
    header's looks field optional.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise RasterFormatError(f"{path}: line 1: missing header 'rows cols looks'")
    head = lines[0].split()
    if len(head) not in (2, 3):
        raise RasterFormatError(f"{path}: line 1: expected 'rows cols looks', got {lines[0]!r}")
    if len(head) == 2 and looks is None:
        raise RasterFormatError(f"{path}: line 1: header has no looks value and none was given")
    try:
        rows, cols = int(head[0]), int(head[1])
        file_looks = float(head[2]) if len(head) == 3 else None
    except ValueError:
        raise RasterFormatError(f"{path}: line 1: cannot parse header {lines[0]!r}") from None
    if rows < 1 or cols < 1:
        raise RasterFormatError(f"{path}: line 1: dimensions must be positive")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        for tok in line.split():
            try:
                values.append(float(tok))
            except ValueError:
                raise RasterFormatError(
                    f"{path}: line {lineno}: pixel {len(values)} is not a number: {tok!r}") from None
    if len(values) != rows * cols:
        raise RasterFormatError(f"{path}: expected {rows * cols} pixels, found {len(values)}")
    arr = np.array(values)
    bad = np.flatnonzero(~(np.isfinite(arr) & (arr > 0)))
    if bad.size:
        raise RasterFormatError(f"{path}: pixel {int(bad[0])} must be positive, got {arr[bad[0]]!r}")
    return Raster(arr.reshape(rows, cols), file_looks if looks is None else looks)


def save_raster(r: Raster, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{r.rows} {r.cols} {r.looks!r}\n")
        for row in r.pixels:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_regions(path) -> list[RegionLabel]:
    """Read "name row0 col0 height width" lines; blank lines and # comments are skipped."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise RasterFormatError(f"{path}: line {lineno}: expected 'name row0 col0 height width'")
        try:
            out.append(RegionLabel(parts[0], *(int(v) for v in parts[1:])))
        except ValueError as exc:
            raise RasterFormatError(f"{path}: line {lineno}: {exc}") from None
    if not out:
        raise RasterFormatError(f"{path}: no regions defined")
    return out


def partition_windows(r: Raster, region: RegionLabel, side: int = DEFAULT_SIDE) -> list[Sample]:
    """Disjoint side x side windows tiled from the region's top-left corner.

    Trailing strips narrower than ``side`` are discarded.
    """
    if side < 2:
        raise DomainError(f"window side must be >= 2, got {side}")
    if region.row0 + region.height > r.rows or region.col0 + region.width > r.cols:
        raise DomainError(f"region {region.name!r} extends beyond the {r.rows}x{r.cols} raster")
    nr, nc = region.height // side, region.width // side
    if nr == 0 or nc == 0:
        raise DomainError(f"region {region.name!r} ({region.height}x{region.width}) "
                          f"is smaller than one {side}x{side} window")
    out = []
    for i in range(nr):
        for j in range(nc):
            r0 = region.row0 + i * side
            c0 = region.col0 + j * side
            out.append(Sample(r.pixels[r0:r0 + side, c0:c0 + side].ravel(), r.looks))
    return out


def fit_windows(r: Raster, regions: Sequence[RegionLabel], side: int = DEFAULT_SIDE) -> list[WindowFit]:
    """Fit every window of every region; failed or implausible fits are kept but flagged."""
    out = []
    wid = 0
    for reg in regions:
        for s in partition_windows(r, reg, side):
            try:
                fit = fit_ml(s)
                sane = sanity_ok(fit)
            except G0Error:
                fit, sane = None, False
            out.append(WindowFit(wid, reg.name, fit, len(s), sane))
            wid += 1
    return out


@dataclass(frozen=True)
class RateTable:
    """Rejection rates over window pairs.

    ``mode`` is "same" (pairs within ``regions[0]``) or "cross"
    (pairs between ``regions[0]`` and ``regions[1]``).  ``pairs`` counts the
    usable pairs and ``excluded_windows`` the windows dropped by the sanity band.
    """

    mode: str
    regions: tuple
    kinds: tuple
    levels: tuple
    pairs: int
    excluded_windows: int
    rejections: dict = field(repr=False)
    looks: float = math.nan
    window: int = 0

    def rate(self, kind: DistanceKind, level: float) -> float:
        return self.rejections[kind, float(level)] / self.pairs


def pairwise_rejection_rates(fits: Sequence[WindowFit], mode: str = "same",
                             regions: Sequence[str] = (), kinds: Sequence[DistanceKind] = ALL_KINDS,
                             levels=(0.01, 0.05),
                             method: EvalMethod = EvalMethod.QUADRATURE) -> RateTable:
    """Test every pair of windows and count rejections per (kind, level).

    mode "same": all unordered pairs of windows of region ``regions[0]``.
    mode "cross": all pairs with one window in ``regions[0]`` and one in ``regions[1]``.
    """
    regions = tuple(regions)
    kinds = tuple(dict.fromkeys(kinds))
    levels = tuple(float(v) for v in levels)
    if mode == "same":
        if len(regions) != 1:
            raise DomainError("same-region mode needs exactly one region name")
        group = [f for f in fits if f.region == regions[0]]
        involved = group
        pairs_iter = itertools.combinations(sorted(group, key=lambda f: f.window_id), 2)
    elif mode == "cross":
        if len(regions) != 2:
            raise DomainError("cross-region mode needs exactly two region names")
        a = sorted((f for f in fits if f.region == regions[0]), key=lambda f: f.window_id)
        b = sorted((f for f in fits if f.region == regions[1]), key=lambda f: f.window_id)
        involved = a + b
        pairs_iter = itertools.product(a, b)
    else:
        raise DomainError(f"mode must be 'same' or 'cross', got {mode!r}")
    excluded = sum(not f.sane for f in involved)
    rejections = {(k, lv): 0 for k in kinds for lv in levels}
    n_pairs = 0
    for w1, w2 in pairs_iter:
        if not (w1.sane and w2.sane):
            continue
        try:
            d = distances(kinds, w1.fit.params, w2.fit.params, method)
        except G0Error:
            continue
        n_pairs += 1
        for k in kinds:
            p = p_value(statistic_from_distance(k, d[k], w1.size, w2.size), DEGREES_OF_FREEDOM)
            for lv in levels:
                rejections[k, lv] += p <= lv
    if n_pairs == 0:
        raise DegenerateResultError(f"no usable window pairs for {mode} mode on {regions}")
    looks = next(f.fit.params.looks for f in involved if f.sane)
    return RateTable(mode, regions, kinds, levels, n_pairs, excluded, rejections,
                     looks, involved[0].size)


RATE_CSV_COLUMNS = ["scenario", "region1", "region2", "L", "N", "kind", "level", "rejection_rate",
                    "pairs", "excluded_windows"]


def write_rate_tables_csv(tables: Sequence[RateTable], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=RATE_CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for t in tables:
        r1 = t.regions[0]
        r2 = t.regions[1] if len(t.regions) > 1 else t.regions[0]
        for k in t.kinds:
            for lv in t.levels:
                w.writerow({"scenario": t.mode, "region1": r1, "region2": r2, "L": t.looks,
                            "N": t.window, "kind": k.label,
                            "level": lv, "rejection_rate": t.rate(k, lv), "pairs": t.pairs,
                            "excluded_windows": t.excluded_windows})
