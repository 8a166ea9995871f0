"""Command-line interface: ``g0contrast {fit,distance,curve,test,simulate,analyze}``.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import itertools
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distances import (ALL_KINDS, CURVE_REFERENCE, DEFAULT_RENYI_BETA, EvalMethod, distance_curve,
                        distances, parse_kind, write_curve_csv)
from .estimation import fit_ml
from .exceptions import DomainError, G0Error, TestUnavailableError
from .image import fit_windows, load_raster, load_regions, pairwise_rejection_rates, write_rate_tables_csv
from .model import G0Params, Sample
from .montecarlo import CELL_FIELDS, PRESETS, preset, run_experiment, write_reports_csv
from .testing import test_samples

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

# options whose values may start with "-" (negative alpha)
_SIGNED_VALUE_FLAGS = {"--p1", "--p2", "--grid", "--cell", "--reference"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _params(text: str) -> G0Params:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected alpha,gamma,L, got {text!r}")
    try:
        return G0Params(*(float(p) for p in parts))
    except ValueError:
        raise UsageError(f"expected three numbers alpha,gamma,L, got {text!r}") from None


def _grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid must be numeric start:stop:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError("grid needs start <= stop and a positive step")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(n)


def _levels(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"levels must be comma-separated numbers, got {text!r}") from None
    if not all(0 < v < 1 for v in vals):
        raise UsageError("levels must lie in (0, 1)")
    return vals


def _kinds(names, beta):
    if not names:
        return [parse_kind("R", beta) if k.name == "renyi" else k for k in ALL_KINDS]
    try:
        return [parse_kind(n, beta) for n in names]
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _read_sample(path: str, looks: float) -> Sample:
    p = Path(path)
    values = []
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise DomainError(f"{path}: line {lineno}: not a number: {line!r}") from None
    if not values:
        raise UsageError(f"{path}: sample file is empty")
    return Sample(np.array(values), looks)


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_fit(args) -> int:
    s = _read_sample(args.sample, args.looks)
    fit = fit_ml(s, tol=args.tol)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "gamma", "mu", "log_likelihood", "converged", "iterations", "n"])
        w.writerow([_fmt(fit.alpha), _fmt(fit.gamma), _fmt(fit.params.mean), _fmt(fit.log_likelihood),
                    _fmt(fit.converged), fit.iterations, len(s)])
    if not fit.converged:
        print(f"warning: fit did not converge (score norm {fit.score_norm_at_opt:.3g})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_distance(args) -> int:
    kinds = _kinds(args.kind, args.beta)
    d = distances(kinds, args.p1, args.p2, EvalMethod(args.method))
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "distance"])
        for k in kinds:
            w.writerow([k.label, _fmt(d[k])])
    return EXIT_OK


def cmd_curve(args) -> int:
    (kind,) = _kinds([args.kind], args.beta)
    rows = distance_curve(kind, _grid(args.grid), args.reference, EvalMethod(args.method))
    with _output(args.out) as fh:
        write_curve_csv(rows, fh)
    return EXIT_OK


def cmd_test(args) -> int:
    s1 = _read_sample(args.sample1, args.looks)
    s2 = _read_sample(args.sample2, args.looks)
    kinds = _kinds(args.kind, args.beta)
    outcomes = [test_samples(k, s1, s2, args.level, EvalMethod(args.method)) for k in kinds]
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "statistic", "df", "p_value", "reject", "level", "m", "n"])
        for o in outcomes:
            w.writerow([o.kind.label, _fmt(o.statistic), o.df, _fmt(o.p_value), _fmt(o.reject),
                        _fmt(o.level), o.m, o.n])
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.reps < 1 or (args.valid is not None and args.valid < 1) or args.workers < 1:
        raise UsageError("--reps, --valid and --workers must be positive")
    try:
        cells = preset(args.preset, max_reps=args.reps, seed=args.seed, levels=_levels(args.levels),
                       cell=args.cell)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    reports = []
    for name, spec, kinds in cells:
        print(f"running {args.preset} cell {name}", file=sys.stderr)
        reports.append(run_experiment(spec, kinds, target_valid=args.valid, workers=args.workers,
                                      method=EvalMethod(args.method)))
    with _output(args.out) as fh:
        write_reports_csv(reports, fh)
    return EXIT_OK


def cmd_analyze(args) -> int:
    raster = load_raster(args.raster, args.looks)
    regions = load_regions(args.regions)
    kinds = _kinds(args.kind, args.beta)
    levels = _levels(args.levels)
    fits = fit_windows(raster, regions, args.side)
    names = [r.name for r in regions]
    tables = []
    for name in names:
        if sum(f.region == name and f.sane for f in fits) >= 2:
            tables.append(pairwise_rejection_rates(fits, "same", [name], kinds, levels))
    for a, b in itertools.combinations(names, 2):
        if any(f.region == a and f.sane for f in fits) and any(f.region == b and f.sane for f in fits):
            tables.append(pairwise_rejection_rates(fits, "cross", [a, b], kinds, levels))
    if not tables:
        raise DomainError("no region has usable windows")
    with _output(args.out) as fh:
        write_rate_tables_csv(tables, fh)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="g0contrast", description="G0 model fitting, distances and contrast tests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, kinds=True):
        p.add_argument("--out", "-o", help="output CSV path (default: standard output)")
        if kinds:
            p.add_argument("--beta", type=float, default=DEFAULT_RENYI_BETA, help="Renyi order")
            p.add_argument("--method", choices=[m.value for m in EvalMethod], default="auto")

    p = sub.add_parser("fit", help="ML fit of one sample file (one value per line)")
    p.add_argument("sample")
    p.add_argument("--looks", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    common(p, kinds=False)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("distance", help="distances between two parameter triples")
    p.add_argument("--p1", type=_params, required=True, help="alpha,gamma,L")
    p.add_argument("--p2", type=_params, required=True, help="alpha,gamma,L")
    p.add_argument("--kind", action="append", help="distance (repeatable; default: all eight)")
    common(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("curve", help="distance to a reference law along an alpha grid")
    p.add_argument("--kind", required=True)
    p.add_argument("--grid", required=True, help="start:stop:step over alpha (< -1)")
    p.add_argument("--reference", type=_params, default=CURVE_REFERENCE, help="alpha,gamma,L")
    common(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("test", help="test whether two samples share their G0 parameters")
    p.add_argument("sample1")
    p.add_argument("sample2")
    p.add_argument("--looks", type=float, required=True)
    p.add_argument("--kind", action="append")
    p.add_argument("--level", type=float, default=0.05)
    common(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="Monte Carlo size/power for a preset grid")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--cell", help="one configuration; fields per preset: "
                   + "; ".join(f"{k}: {v}" for k, v in CELL_FIELDS.items()))
    p.add_argument("--reps", type=int, default=5500, help="replications attempted per cell")
    p.add_argument("--valid", type=int, default=2000,
                   help="stop once this many valid replications are collected")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", "--threads", dest="workers", type=int,
                   default=max(1, min(4, os.cpu_count() or 1)))
    p.add_argument("--levels", default="0.01,0.05")
    p.add_argument("--method", choices=[m.value for m in EvalMethod], default="quadrature")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="same-region and cross-region rates on a raster")
    p.add_argument("raster")
    p.add_argument("regions")
    p.add_argument("--looks", type=float, help="override the looks value in the raster header")
    p.add_argument("--side", type=int, default=7)
    p.add_argument("--kind", action="append")
    p.add_argument("--levels", default="0.01,0.05")
    p.add_argument("--beta", type=float, default=DEFAULT_RENYI_BETA)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_analyze)
    return parser


def _join_signed_values(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_signed_values(argv))
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (G0Error, TestUnavailableError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
