#!/usr/bin/env python3
"""Run the full experiment suite at paper scale and write reports.

Produces one CSV + JSON pair per experiment kind under --outdir.  The
ladders match the acceptance suite; pass --quick for a fast smoke pass.
"""

import argparse
import pathlib
import sys
import time

from qbl import ExperimentConfig, run_experiment, write_report
from qbl.experiments import DEFAULT_SEED, resolve_threads

FULL = {
    "betti_k1": dict(n_list=(8, 16, 32, 64, 128), trials=500),
    "index_imbalance": dict(n_list=(8, 16, 32, 64, 128), trials=500),
    "semicircle": dict(n_list=(64, 256), trials=100),
    "crofton": dict(n_list=(4,), trials=1_000_000),
    "gap_slope": dict(n_list=(4, 8, 16), trials=200_000),
    "sigma_scaling": dict(n_list=(8, 16, 32, 64, 128, 256), trials=2000),
    "betti_k2": dict(n_list=(9, 17, 33, 65, 129), trials=500),
    "mu_over_n": dict(n_list=(8, 16, 32, 64, 128, 256), trials=1000),
    "cplusd": dict(n_list=(2, 4, 8, 16, 32, 64), trials=5000),
    "rankd2": dict(n_list=(2, 4, 8, 16, 32, 64), trials=5000),
}

QUICK = {kind: dict(n_list=spec["n_list"][:3], trials=min(spec["trials"], 50))
         for kind, spec in FULL.items()}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--kinds", help="comma-separated subset to run")
    args = ap.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    suite = QUICK if args.quick else FULL
    kinds = args.kinds.split(",") if args.kinds else list(suite)

    threads = resolve_threads(args.threads)
    for kind in kinds:
        spec = suite[kind]
        cfg = ExperimentConfig(kind=kind, root_seed=args.seed,
                               threads=threads, **spec)
        t0 = time.perf_counter()
        report = run_experiment(cfg)
        write_report(report, str(outdir / f"{kind}.csv"), "csv")
        write_report(report, str(outdir / f"{kind}.json"), "json")
        line = f"{kind:16s} {time.perf_counter() - t0:7.1f}s"
        if report.fit:
            line += (f"  fit exponent={report.fit['exponent']:.3f}"
                     f" r2={report.fit['r2']:.4f}")
        if report.assertion_failures:
            line += f"  !! {len(report.assertion_failures)} invariant failures"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
