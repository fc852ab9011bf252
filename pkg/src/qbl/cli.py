"""Command-line frontend.

Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 assertion
failure under `experiment --assert`.  Every machine-readable artifact
embeds the config and seed that produced it, and error messages carry
the replay seed when one exists.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from ._version import __version__
from .ensembles import SymMatrix, haar_rotation, sample_goe, sample_weyl_quadric
from .errors import NumericFailure
from .experiments import (DEFAULT_SEED, ExperimentConfig, resolve_threads,
                          run_experiment, write_report)
from .integral_geometry import SubsphereSpec, integral_geometry_check
from .pencils import Pencil, betti_two_quadrics, scan_pencil
from .quadrics import betti_one_quadric, crofton_resampled_mean
from .rmt import c_n_exact, gap_probability_mc
from .seeding import SeedSpec

USAGE_ERROR, NUMERIC_ERROR, ASSERT_ERROR = 2, 3, 4


def parse_matrix(text: str) -> SymMatrix:
    """Rows separated by ';', entries by ','; '@path' reads the same
    syntax from a file."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read().strip()
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.split(";") if row.strip()]
        return SymMatrix.from_dense(np.array(rows))
    except (ValueError, IndexError) as exc:
        raise SystemExit(f"error: bad matrix literal: {exc}") from exc


def _matrix_lines(a: np.ndarray) -> str:
    return "\n".join(",".join(f"{x:.12g}" for x in row) for row in a)


def _write_single(path: str | None, fmt: str, doc: dict) -> None:
    if not path:
        return
    with open(path, "w") as fh:
        if fmt == "json":
            fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        else:
            fh.write("key,value\n")
            for k, v in sorted(doc.items()):
                fh.write(f"{k},{v}\n")


def _add_common(p: argparse.ArgumentParser, trials_default: int | None = None):
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"root seed (default {DEFAULT_SEED})")
    p.add_argument("--out", help="write machine-readable output here")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    if trials_default is not None:
        p.add_argument("--trials", type=int, default=trials_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qbl",
        description="Random real quadrics: sampling, topology and Monte Carlo experiments")
    ap.add_argument("--version", action="version", version=f"qbl {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a GOE matrix, Weyl form or Haar rotation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind", choices=("goe", "weyl", "haar"), default="goe")
    _add_common(p)

    p = sub.add_parser("betti", help="total Betti number of one or two quadrics")
    p.add_argument("--k", type=int, choices=(1, 2), default=1)
    p.add_argument("--n", type=int, help="order for random input")
    p.add_argument("--matrix", help="explicit symmetric matrix (rows ';', entries ',')")
    p.add_argument("--matrix2", help="second matrix for --k 2")
    p.add_argument("--grid", type=int, help="scan grid size (k=2)")
    p.add_argument("--tol", type=float, help="zero tolerance override")
    _add_common(p)

    p = sub.add_parser("pencil", help="index-function scan of a two-quadric pencil")
    p.add_argument("--n", type=int)
    p.add_argument("--matrix")
    p.add_argument("--matrix2")
    p.add_argument("--grid", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--method", choices=("grid", "eig"), default="grid")
    _add_common(p)

    p = sub.add_parser("semicircle", help="empirical spectral distribution vs semicircle")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--bins", type=int, default=1000)
    _add_common(p, trials_default=100)

    p = sub.add_parser("gap", help="Monte Carlo gap probability")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--rescaled", action="store_true",
                   help="threshold eps * ||Q||_F instead of eps")
    _add_common(p, trials_default=100000)

    p = sub.add_parser("crofton", help="mean line-section root count (target sqrt(2))")
    p.add_argument("--n", type=int, default=4)
    _add_common(p, trials_default=100000)

    p = sub.add_parser("igcheck", help="rotation-averaging check on S^2")
    p.add_argument("--config", choices=("circle-circle", "circle-band"),
                   default="circle-band")
    p.add_argument("--radius", type=float, default=0.5,
                   help="band angular radius (circle-band)")
    _add_common(p, trials_default=10000)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment ladder")
    p.add_argument("kind")
    p.add_argument("--n", required=True, help="comma-separated ladder, e.g. 8,16,32")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--grid", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--rescaled", action="store_true")
    p.add_argument("--bins", type=int, default=1000)
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (QBL_THREADS as fallback); never changes results")
    p.add_argument("--assert", dest="assert_invariants", action="store_true",
                   help="exit 4 if any per-trial invariant failed or the discard budget was blown")
    _add_common(p)

    return ap


def _obtain_matrix(args, attr: str, n_fallback, seed, salt: int) -> SymMatrix:
    literal = getattr(args, attr, None)
    if literal:
        return parse_matrix(literal)
    if n_fallback is None:
        raise SystemExit(f"error: provide --{attr} or --n for a random draw")
    return sample_goe(n_fallback, SeedSpec(seed, salt))


def _cmd_sample(args) -> int:
    if args.kind == "haar":
        mat = haar_rotation(args.n, SeedSpec(args.seed))
        print(_matrix_lines(mat))
        _write_single(args.out, args.format,
                      {"kind": "haar", "n": args.n, "seed": args.seed,
                       "matrix": _matrix_lines(mat).replace("\n", ";")})
        return 0
    if args.kind == "weyl":
        q = sample_weyl_quadric(args.n, SeedSpec(args.seed))
        for (i, j), c in sorted(q.coeffs.items()):
            print(f"c[{i},{j}] = {c:.12g}")
        _write_single(args.out, args.format,
                      {"kind": "weyl", "n": args.n, "seed": args.seed,
                       **{f"c_{i}_{j}": c for (i, j), c in q.coeffs.items()}})
        return 0
    mat = sample_goe(args.n, SeedSpec(args.seed))
    print(_matrix_lines(mat.dense()))
    _write_single(args.out, args.format,
                  {"kind": "goe", "n": args.n, "seed": args.seed,
                   "matrix": _matrix_lines(mat.dense()).replace("\n", ";")})
    return 0


def _cmd_betti(args) -> int:
    if args.k == 1:
        mat = _obtain_matrix(args, "matrix", args.n, args.seed, 0)
        res = betti_one_quadric(mat, zero_tol=args.tol)
        if res.degenerate:
            print(f"degenerate quadric (mu={res.mu}); no Betti claim")
        else:
            print(f"mu={res.mu} b={res.total_betti}")
        _write_single(args.out, args.format,
                      {"k": 1, "n": mat.order, "seed": args.seed, "mu": res.mu,
                       "b": res.total_betti, "degenerate": res.degenerate})
        return 0
    m1 = _obtain_matrix(args, "matrix", args.n, args.seed, 0)
    m2 = _obtain_matrix(args, "matrix2", args.n, args.seed, 1)
    tq = betti_two_quadrics(Pencil(m1, m2), grid_size=args.grid,
                            zero_tol=args.tol)
    print(f"mu={tq.mu} sigma_count={tq.sigma_count} c_plus_d={tq.c_plus_d} "
          f"rank_d2={tq.rank_d2} b={tq.ledger_betti} b_closed={tq.total_betti}")
    _write_single(args.out, args.format,
                  {"k": 2, "n": m1.order, "seed": args.seed, "mu": tq.mu,
                   "sigma_count": tq.sigma_count, "c_plus_d": tq.c_plus_d,
                   "rank_d2": tq.rank_d2, "b_ledger": tq.ledger_betti,
                   "b_closed": tq.total_betti,
                   "constant_index": tq.constant_index})
    return 0


def _cmd_pencil(args) -> int:
    m1 = _obtain_matrix(args, "matrix", args.n, args.seed, 0)
    m2 = _obtain_matrix(args, "matrix2", args.n, args.seed, 1)
    kwargs = {"zero_tol": args.tol}
    if args.method == "grid" and args.grid:
        kwargs["grid_size"] = args.grid
    scan = scan_pencil(Pencil(m1, m2), method=args.method, **kwargs)
    if scan.discarded:
        print(f"scan discarded: {scan.discard_reason}")
        return 0
    crossings = ",".join(f"{t:.9f}" for t in scan.crossings)
    print(f"crossings=[{crossings}]")
    print(f"arc_index={list(scan.arc_index)}")
    print(f"mu={scan.mu} min_index={scan.min_index} sigma_count={scan.sigma_count} "
          f"index_constant={scan.index_constant}")
    _write_single(args.out, args.format,
                  {"n": m1.order, "seed": args.seed, "crossings": crossings,
                   "arc_index": " ".join(map(str, scan.arc_index)),
                   "mu": scan.mu, "min_index": scan.min_index,
                   "sigma_count": scan.sigma_count,
                   "index_constant": scan.index_constant})
    return 0


def _run_and_emit(cfg: ExperimentConfig, args) -> "ExperimentReport":
    report = run_experiment(cfg)
    if args.out:
        write_report(report, args.out, args.format)
    return report


def _cmd_semicircle(args) -> int:
    cfg = ExperimentConfig(kind="semicircle", n_list=(args.n,),
                           trials=args.trials, root_seed=args.seed,
                           bins=args.bins)
    report = _run_and_emit(cfg, args)
    row = report.rows[0]
    print(f"n={row.n} samples={row.trials} ks_distance={row.mean:.6f} "
          f"mass_outside_2.1={row.aux['mass_outside_2p1']:.6f}")
    return 0


def _cmd_gap(args) -> int:
    est = gap_probability_mc(args.n, args.eps, args.trials,
                             SeedSpec(args.seed), rescaled=args.rescaled)
    line = (f"n={args.n} eps={args.eps:g} rescaled={args.rescaled} "
            f"estimate={est.estimate:.6f} stderr={est.stderr:.2e}")
    doc = {"n": args.n, "eps": args.eps, "rescaled": args.rescaled,
           "seed": args.seed, "trials": args.trials,
           "estimate": est.estimate, "stderr": est.stderr}
    if args.n % 2 == 0 and not args.rescaled:
        ref = 2.0 * c_n_exact(args.n) * args.eps
        line += f" reference_2c_eps={ref:.6f}"
        doc["reference_2c_eps"] = ref
    print(line)
    _write_single(args.out, args.format, doc)
    return 0


def _cmd_crofton(args) -> int:
    mean, stderr = crofton_resampled_mean(args.n, args.trials, SeedSpec(args.seed))
    print(f"n={args.n} lines={args.trials} mean_roots={mean:.6f} "
          f"stderr={stderr:.2e} target={math.sqrt(2):.6f}")
    _write_single(args.out, args.format,
                  {"n": args.n, "lines": args.trials, "seed": args.seed,
                   "mean_roots": mean, "stderr": stderr,
                   "target": math.sqrt(2)})
    return 0


def _cmd_igcheck(args) -> int:
    circle = SubsphereSpec(ambient_dim=2, subspace_dim=2)
    if args.config == "circle-circle":
        other = SubsphereSpec(ambient_dim=2, subspace_dim=2)
    else:
        other = SubsphereSpec(ambient_dim=2, subspace_dim=2,
                              band_radius=args.radius)
    res = integral_geometry_check(circle, other, args.trials, SeedSpec(args.seed))
    print(f"config={args.config} lhs={res.lhs_estimate:.6f} rhs={res.rhs_exact:.6f} "
          f"stderr={res.stderr:.2e} rotations={res.rotations}")
    _write_single(args.out, args.format,
                  {"config": args.config, "seed": args.seed,
                   "rotations": res.rotations, "lhs": res.lhs_estimate,
                   "rhs": res.rhs_exact, "stderr": res.stderr})
    return 0


def _cmd_experiment(args) -> int:
    try:
        n_list = tuple(int(x) for x in args.n.split(","))
    except ValueError as exc:
        raise SystemExit(f"error: bad --n list: {exc}") from exc
    cfg = ExperimentConfig(kind=args.kind, n_list=n_list, trials=args.trials,
                           root_seed=args.seed, grid_size=args.grid,
                           zero_tol=args.tol, epsilon=args.eps,
                           rescaled=args.rescaled, bins=args.bins,
                           threads=resolve_threads(args.threads))
    report = _run_and_emit(cfg, args)
    for row in report.rows:
        aux = " ".join(f"{k}={v:.6g}" for k, v in sorted(row.aux.items()))
        print(f"kind={report.kind} n={row.n} trials={row.trials} "
              f"mean={row.mean:.6g} stderr={row.stderr:.3g} "
              f"discarded={row.discarded} {aux}")
    if report.fit is not None:
        print(f"fit exponent={report.fit['exponent']:.4f} "
              f"intercept={report.fit['intercept']:.4f} r2={report.fit['r2']:.5f}")
    if report.assertion_failures:
        for rec in report.assertion_failures[:10]:
            print(f"ASSERTION FAILURE {rec}", file=sys.stderr)
    if args.assert_invariants and (report.assertion_failures or report.flagged):
        print("assertion check failed", file=sys.stderr)
        return ASSERT_ERROR
    return 0


_COMMANDS = {
    "sample": _cmd_sample,
    "betti": _cmd_betti,
    "pencil": _cmd_pencil,
    "semicircle": _cmd_semicircle,
    "gap": _cmd_gap,
    "crofton": _cmd_crofton,
    "igcheck": _cmd_igcheck,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return USAGE_ERROR
        return int(exc.code or 0)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
