"""Monte Carlo experiment driver.

Each experiment kind maps a per-trial statistic over a ladder of matrix
orders with counter-based per-trial seeds, aggregates mean / stderr /
auxiliary means, resamples non-generic draws (counting them against a 1%
budget), and records any per-trial invariant violation together with the
(root_seed, stream_id) pair that replays it.

Determinism contract: a report's rows depend only on the config, never
on worker count or scheduling.  Trials write into slots indexed by their
stream and the reduction is numpy's fixed pairwise sum; BLAS pools are
pinned to one thread inside the driver so the kernels themselves cannot
introduce scheduling noise.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np
from threadpoolctl import threadpool_limits

from ._version import __version__
from .ensembles import sample_goe, sample_goe_batch, sample_goe_pair
from .errors import NumericFailure, SampleDiscarded
from .quadrics import (betti_one_quadric, complex_betti_one_quadric,
                       crofton_resampled_mean)
from .pencils import (Pencil, alexander_count_check, betti_two_quadrics,
                      c_plus_d, mu_sandwich_check, rank_d2, scan_index_function,
                      scan_pencil_fast)
from .rmt import (c_n_exact, empirical_spectral_distribution, gap_probability_mc,
                  index_imbalance, ks_distance)
from .seeding import SeedSpec
from .spectra import Spectrum, inertia

KINDS = ("betti_k1", "betti_k2", "sigma_scaling", "cplusd", "rankd2",
         "semicircle", "gap_slope", "crofton", "mu_over_n", "index_imbalance")

DEFAULT_SEED = 1729  # documented constant: bare runs are reproducible

CSV_COLUMNS = ("kind", "n", "trials", "mean", "stderr", "mean_mu",
               "mean_sigma_count", "mean_cplusd", "mean_rankd2",
               "mean_imbalance", "discarded", "seconds")

_DISCARD_BUDGET = 0.01
_FAILURE_BUDGET = 0.01
_MAX_ATTEMPTS = 64


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n_list: tuple[int, ...]
    trials: int
    root_seed: int = DEFAULT_SEED
    grid_size: int | None = None
    refine_tol: float = 1e-10
    zero_tol: float | None = None
    epsilon: float | None = None
    rescaled: bool = False
    bins: int = 1000
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        ns = tuple(int(n) for n in self.n_list)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_list must be nonempty and strictly ascending")
        object.__setattr__(self, "n_list", ns)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        # threads is an execution detail: reports must be identical for any
        # worker count, so it stays out of the config echo.
        doc = asdict(self)
        doc.pop("threads")
        return doc


@dataclass
class RowStats:
    n: int
    trials: int
    mean: float
    stderr: float
    aux: dict[str, float]
    discarded: int
    seconds: float


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    rows: list[RowStats]
    fit: dict | None
    assertion_failures: list[dict]
    flagged: bool
    version: str
    wall_time_s: float

    def row_for(self, n: int) -> RowStats:
        for row in self.rows:
            if row.n == n:
                return row
        raise KeyError(f"no row for n={n}")


def _row_stream_base(row_index: int) -> int:
    # Distinct trial streams across ladder rows: stream = (row << 32) + trial.
    return row_index << 32


def trial_seed(root_seed: int, row_index: int, trial: int,
               attempt: int = 0) -> SeedSpec:
    """Seed of a given trial: attempt 0 is the plain per-trial stream,
    resampling attempts derive children of it."""
    base = SeedSpec(root_seed, _row_stream_base(row_index) + trial)
    return base if attempt == 0 else base.child(attempt)


# ---------------------------------------------------------------------------
# Per-trial statistics.  Each returns (stat, aux_dict) and may raise
# SampleDiscarded to request a redraw, or append assertion records.

def _scan_kwargs(cfg: ExperimentConfig) -> dict:
    return {"grid_size": cfg.grid_size, "refine_tol": cfg.refine_tol,
            "zero_tol": cfg.zero_tol}


def _trial_betti_k1(cfg, n, seed, record):
    mat = sample_goe(n, seed)
    res = betti_one_quadric(mat)
    if res.degenerate:
        raise SampleDiscarded("degenerate quadric")
    inr = inertia(mat)
    if res.total_betti > complex_betti_one_quadric(n - 1):
        record("smith_inequality_k1", f"b={res.total_betti}")
    imbalance = abs(inr.pos - inr.neg) / n
    return res.total_betti / n, {"mean_mu": res.mu, "mean_imbalance": imbalance}


def _trial_index_imbalance(cfg, n, seed, record):
    mat = sample_goe(n, seed)
    return index_imbalance(mat), {}


def _pencil_from(n, seed) -> Pencil:
    q1, q2 = sample_goe_pair(n, seed)
    return Pencil(q1, q2)


def _trial_betti_k2(cfg, n, seed, record):
    p = _pencil_from(n, seed)
    scan = scan_index_function(p, **_scan_kwargs(cfg))
    if scan.discarded:
        raise SampleDiscarded(scan.discard_reason or "scan discarded")
    tq = betti_two_quadrics(p, scan=scan)
    if not mu_sandwich_check(p, scan):
        record("mu_sandwich", f"mu={scan.mu}")
    if not alexander_count_check(scan):
        record("alexander_count", f"sigma={scan.sigma_count}")
    if not tq.constant_index and (tq.clamped
                                  or tq.total_betti != tq.ledger_betti):
        record("ledger_vs_closed", f"{tq.total_betti} vs {tq.ledger_betti}")
    aux = {"mean_mu": tq.mu, "mean_sigma_count": tq.sigma_count,
           "mean_cplusd": tq.c_plus_d, "mean_rankd2": tq.rank_d2,
           "closed_over_n": tq.total_betti / n}
    return tq.ledger_betti / n, aux


def _trial_sigma_scaling(cfg, n, seed, record):
    p = _pencil_from(n, seed)
    scan = scan_pencil_fast(p, zero_tol=cfg.zero_tol)
    if scan.discarded:
        raise SampleDiscarded(scan.discard_reason or "scan discarded")
    return float(scan.sigma_count), {"mean_mu": scan.mu}


def _trial_mu_over_n(cfg, n, seed, record):
    p = _pencil_from(n, seed)
    scan = scan_pencil_fast(p, zero_tol=cfg.zero_tol)
    if scan.discarded:
        raise SampleDiscarded(scan.discard_reason or "scan discarded")
    return 4.0 * scan.mu / n, {"mean_mu": scan.mu,
                               "mean_sigma_count": scan.sigma_count}


def _trial_cplusd(cfg, n, seed, record):
    p = _pencil_from(n, seed)
    scan = scan_index_function(p, **_scan_kwargs(cfg))
    if scan.discarded:
        raise SampleDiscarded(scan.discard_reason or "scan discarded")
    return float(c_plus_d(scan)), {"mean_rankd2": rank_d2(scan),
                                   "constant_rate": float(scan.index_constant),
                                   "mean_sigma_count": scan.sigma_count}


def _trial_rankd2(cfg, n, seed, record):
    p = _pencil_from(n, seed)
    scan = scan_index_function(p, **_scan_kwargs(cfg))
    if scan.discarded:
        raise SampleDiscarded(scan.discard_reason or "scan discarded")
    return float(rank_d2(scan)), {"mean_cplusd": c_plus_d(scan),
                                  "constant_rate": float(scan.index_constant)}


_TRIAL_FNS = {
    "betti_k1": _trial_betti_k1,
    "betti_k2": _trial_betti_k2,
    "sigma_scaling": _trial_sigma_scaling,
    "mu_over_n": _trial_mu_over_n,
    "cplusd": _trial_cplusd,
    "rankd2": _trial_rankd2,
    "index_imbalance": _trial_index_imbalance,
}


def _run_scalar_row(cfg: ExperimentConfig, n: int, row_index: int,
                    failures: list[dict]) -> RowStats:
    trial_fn = _TRIAL_FNS[cfg.kind]
    stats = np.empty(cfg.trials)
    aux_store: list[dict] = [{} for _ in range(cfg.trials)]
    discarded = np.zeros(cfg.trials, dtype=int)
    numeric_failures = np.zeros(cfg.trials, dtype=int)

    def record_factory(trial):
        def record(check, detail):
            failures.append({
                "kind": cfg.kind, "n": n, "check": check, "detail": detail,
                "root_seed": cfg.root_seed,
                "stream_id": _row_stream_base(row_index) + trial,
            })
        return record

    def run_trial(trial: int):
        record = record_factory(trial)
        for attempt in range(_MAX_ATTEMPTS):
            seed = trial_seed(cfg.root_seed, row_index, trial, attempt)
            try:
                stat, aux = trial_fn(cfg, n, seed, record)
            except SampleDiscarded:
                discarded[trial] += 1
                continue
            except NumericFailure:
                numeric_failures[trial] += 1
                continue
            stats[trial] = stat
            aux_store[trial] = aux
            return
        raise NumericFailure(
            f"trial exhausted {_MAX_ATTEMPTS} attempts",
            root_seed=cfg.root_seed,
            stream_id=_row_stream_base(row_index) + trial)

    t0 = time.perf_counter()
    if cfg.threads == 1:
        for trial in range(cfg.trials):
            run_trial(trial)
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            list(pool.map(run_trial, range(cfg.trials)))
    seconds = time.perf_counter() - t0

    n_failures = int(numeric_failures.sum())
    if n_failures > _FAILURE_BUDGET * cfg.trials:
        raise NumericFailure(
            f"{n_failures} numeric failures in {cfg.trials} trials at n={n}",
            root_seed=cfg.root_seed, stream_id=_row_stream_base(row_index))

    mean = float(np.mean(stats))
    stderr = float(np.std(stats, ddof=1) / math.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0
    aux_keys = sorted({k for a in aux_store for k in a})
    aux = {k: float(np.mean([a[k] for a in aux_store if k in a])) for k in aux_keys}
    return RowStats(n=n, trials=cfg.trials, mean=mean, stderr=stderr, aux=aux,
                    discarded=int(discarded.sum()), seconds=seconds)


def _run_semicircle_row(cfg: ExperimentConfig, n: int, row_index: int,
                        failures: list[dict]) -> RowStats:
    t0 = time.perf_counter()
    seed = SeedSpec(cfg.root_seed, _row_stream_base(row_index))
    spectra = []
    done = 0
    chunk_idx = 0
    while done < cfg.trials:
        b = min(256, cfg.trials - done)
        mats = sample_goe_batch(n, b, seed.child(chunk_idx))
        for w in np.linalg.eigvalsh(mats):
            spectra.append(Spectrum(eigenvalues=w, zero_tol=0.0))
        done += b
        chunk_idx += 1
    esd = empirical_spectral_distribution(spectra, bins=cfg.bins)
    ks = ks_distance(esd)
    aux = {"mass_outside_2p1": esd.mass_outside(-2.1, 2.1)}
    return RowStats(n=n, trials=cfg.trials, mean=ks, stderr=0.0, aux=aux,
                    discarded=0, seconds=time.perf_counter() - t0)


def _default_gap_epsilon(n: int) -> float:
    # Target 2 c_n eps ~ 0.03, small enough that the quadratic term hides
    # below Monte Carlo noise; the asymptote stands in for odd n.
    c = c_n_exact(n) if n % 2 == 0 else math.sqrt(2.0 * n) / math.pi
    return 0.015 / c


def _run_gap_row(cfg: ExperimentConfig, n: int, row_index: int,
                 failures: list[dict]) -> RowStats:
    t0 = time.perf_counter()
    eps = cfg.epsilon if cfg.epsilon is not None else _default_gap_epsilon(n)
    est = gap_probability_mc(n, eps, cfg.trials,
                             SeedSpec(cfg.root_seed, _row_stream_base(row_index)),
                             rescaled=cfg.rescaled)
    aux = {"epsilon": eps}
    if n % 2 == 0 and eps > 0 and not cfg.rescaled:
        ref = 2.0 * c_n_exact(n) * eps
        aux["reference_decay"] = ref
        aux["slope_ratio"] = (1.0 - est.estimate) / ref
    return RowStats(n=n, trials=cfg.trials, mean=est.estimate,
                    stderr=est.stderr, aux=aux, discarded=0,
                    seconds=time.perf_counter() - t0)


def _run_crofton_row(cfg: ExperimentConfig, n: int, row_index: int,
                     failures: list[dict]) -> RowStats:
    t0 = time.perf_counter()
    mean, stderr = crofton_resampled_mean(
        n, cfg.trials, SeedSpec(cfg.root_seed, _row_stream_base(row_index)))
    return RowStats(n=n, trials=cfg.trials, mean=mean, stderr=stderr,
                    aux={}, discarded=0, seconds=time.perf_counter() - t0)


_ROW_RUNNERS = {"semicircle": _run_semicircle_row, "gap_slope": _run_gap_row,
                "crofton": _run_crofton_row}


def scaling_fit(ns, means) -> dict:
    """Least-squares fit of log(mean) against log(n).

    Returns {"exponent", "intercept", "r2"}; requires >= 3 distinct n and
    strictly positive means.
    """
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    if len(ns) < 3 or len(np.unique(ns)) < 3:
        raise ValueError("need at least 3 distinct n")
    if np.any(means <= 0.0):
        raise ValueError("means must be positive for a log-log fit")
    x = np.log(ns)
    y = np.log(means)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {"exponent": float(slope), "intercept": float(intercept), "r2": r2}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every ladder row of the configured experiment kind."""
    t0 = time.perf_counter()
    failures: list[dict] = []
    rows: list[RowStats] = []
    runner = _ROW_RUNNERS.get(cfg.kind)
    with threadpool_limits(limits=1):
        for row_index, n in enumerate(cfg.n_list):
            if runner is not None:
                rows.append(runner(cfg, n, row_index, failures))
            else:
                rows.append(_run_scalar_row(cfg, n, row_index, failures))
    fit = None
    if cfg.kind == "sigma_scaling" and len(rows) >= 3:
        fit = scaling_fit([r.n for r in rows], [r.mean for r in rows])
    flagged = any(r.discarded > _DISCARD_BUDGET * r.trials for r in rows)
    return ExperimentReport(kind=cfg.kind, config=cfg.to_dict(), rows=rows,
                            fit=fit, assertion_failures=failures,
                            flagged=flagged, version=__version__,
                            wall_time_s=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Persistence.  The CSV column set is fixed; the JSON document mirrors the
# whole report.  Both embed the config and seed so any number is
# replayable from the file alone.

def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def report_to_csv(report: ExperimentReport) -> str:
    lines = ["# config = " + json.dumps(report.config, sort_keys=True),
             ",".join(CSV_COLUMNS)]
    for row in report.rows:
        rec = {
            "kind": report.kind, "n": row.n, "trials": row.trials,
            "mean": row.mean, "stderr": row.stderr,
            "mean_mu": row.aux.get("mean_mu", ""),
            "mean_sigma_count": row.aux.get("mean_sigma_count", ""),
            "mean_cplusd": row.aux.get("mean_cplusd", ""),
            "mean_rankd2": row.aux.get("mean_rankd2", ""),
            "mean_imbalance": row.aux.get("mean_imbalance", ""),
            "discarded": row.discarded,
            "seconds": f"{row.seconds:.3f}",
        }
        lines.append(",".join(_fmt(rec[c]) if rec[c] != "" else ""
                              for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def report_to_json(report: ExperimentReport) -> str:
    doc = {
        "kind": report.kind,
        "config": report.config,
        "rows": [{"n": r.n, "trials": r.trials, "mean": r.mean,
                  "stderr": r.stderr, "aux": r.aux, "discarded": r.discarded,
                  "seconds": round(r.seconds, 3)} for r in report.rows],
        "fit": report.fit,
        "assertion_failures": report.assertion_failures,
        "flagged": report.flagged,
        "provenance": {"version": report.version,
                       "wall_time_s": round(report.wall_time_s, 3)},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_report(report: ExperimentReport, path: str, fmt: str = "csv") -> None:
    text = report_to_csv(report) if fmt == "csv" else report_to_json(report)
    with open(path, "w") as fh:
        fh.write(text)


def resolve_threads(explicit: int | None) -> int:
    """--threads flag, else QBL_THREADS, else 1."""
    if explicit is not None:
        return max(1, explicit)
    env = os.environ.get("QBL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1
