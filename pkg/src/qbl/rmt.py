"""Random-matrix statistics: semicircle comparison, index imbalance,
gap probabilities and the exact small-gap slope constant."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import SymMatrix, sample_goe_batch
from .seeding import as_seed
from .spectra import Spectrum, inertia

_HIST_RANGE = 3.5  # semicircle support is [-2, 2]; finite-n tails need headroom
_CHUNK = 4096


@dataclass(frozen=True)
class EmpiricalSpectralDist:
    """Histogram of pooled eigenvalues rescaled to the unit semicircle edge.

    With the off-diagonal variance 1/2 convention used by sample_goe, the
    spectral radius grows like sqrt(2n), so eigenvalues are divided by
    sqrt(n/2) to put the limiting support at [-2, 2] where semicircle_cdf
    lives.  bin_edges has two infinite overflow edges so every sample
    lands in a bin and the masses always sum to one.
    """

    bin_edges: np.ndarray
    masses: np.ndarray
    n: int
    samples_pooled: int

    def __post_init__(self):
        if abs(self.masses.sum() - 1.0) > 1e-12:
            raise ValueError("masses must sum to 1")
        finite = self.bin_edges[np.isfinite(self.bin_edges)]
        if finite[0] > -3.0 or finite[-1] < 3.0:
            raise ValueError("bins must cover [-3, 3]")

    def cdf_at_edges(self) -> np.ndarray:
        return np.cumsum(self.masses)

    def mass_outside(self, lo: float, hi: float) -> float:
        """Total mass of bins not fully inside [lo, hi]."""
        left = self.bin_edges[:-1]
        right = self.bin_edges[1:]
        inside = (left >= lo) & (right <= hi)
        return float(self.masses[~inside].sum())


def empirical_spectral_distribution(samples: list[Spectrum],
                                    bins: int) -> EmpiricalSpectralDist:
    """Pool the spectra, rescale by sqrt(n/2), histogram to unit mass."""
    if bins < 10:
        raise ValueError("bins must be >= 10")
    if not samples:
        raise ValueError("need at least one spectrum")
    n = samples[0].order
    if any(s.order != n for s in samples):
        raise ValueError("all spectra must have the same order")
    pooled = np.concatenate([s.eigenvalues for s in samples]) / np.sqrt(n / 2.0)
    inner = np.linspace(-_HIST_RANGE, _HIST_RANGE, bins + 1)
    edges = np.r_[-np.inf, inner, np.inf]
    counts, _ = np.histogram(pooled, bins=edges)
    return EmpiricalSpectralDist(bin_edges=edges,
                                 masses=counts / counts.sum(),
                                 n=n, samples_pooled=len(samples))


def semicircle_cdf(x) -> float | np.ndarray:
    """CDF of the semicircle density (1/2pi) sqrt(4 - x^2) on [-2, 2]."""
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    val = 0.5 + (xc * np.sqrt(4.0 - xc * xc) + 4.0 * np.arcsin(xc / 2.0)) / (4.0 * np.pi)
    return float(val) if val.ndim == 0 else val


def ks_distance(esd: EmpiricalSpectralDist) -> float:
    """Max |empirical CDF - semicircle CDF| over the histogram edges."""
    edges = esd.bin_edges[1:]  # CDF after each bin; +inf edge gives 1 vs 1
    emp = esd.cdf_at_edges()
    finite = np.isfinite(edges)
    ref = semicircle_cdf(edges[finite])
    return float(np.max(np.abs(emp[finite] - ref)))


def index_imbalance(mat: SymMatrix) -> float:
    """|pos - neg| / n at the default zero tolerance."""
    inr = inertia(mat)
    return abs(inr.pos - inr.neg) / mat.order


@dataclass(frozen=True)
class GapEstimate:
    """Monte Carlo estimate of a spectral gap probability."""

    epsilon: float
    estimate: float
    stderr: float
    trials: int
    rescaled: bool


def gap_probability_mc(n: int, epsilon: float, trials: int, seed,
                       rescaled: bool = False) -> GapEstimate:
    """P{min |lambda_i| >= eps} (rescaled=False) or >= eps * ||Q||_F.

    Plain binomial Monte Carlo over fresh GOE(n) draws; the batched
    eigensolver keeps a million trials at small n around a few seconds.
    """
    if trials < 1000:
        raise ValueError("trials must be >= 1000")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    seed = as_seed(seed)
    hits = 0
    done = 0
    chunk_idx = 0
    while done < trials:
        b = min(_CHUNK, trials - done)
        mats = sample_goe_batch(n, b, seed.child(chunk_idx))
        w = np.linalg.eigvalsh(mats)
        sigma = np.min(np.abs(w), axis=1)
        if rescaled:
            thresholds = epsilon * np.sqrt(np.sum(w * w, axis=1))
        else:
            thresholds = epsilon
        hits += int(np.sum(sigma >= thresholds))
        done += b
        chunk_idx += 1
    p = hits / trials
    return GapEstimate(epsilon=float(epsilon), estimate=p,
                       stderr=math.sqrt(p * (1.0 - p) / trials),
                       trials=trials, rescaled=rescaled)


def c_n_exact(n: int) -> float:
    """Gamma((n+1)/2) / (Gamma(n/2) Gamma(1/2) Gamma(3/2)), n even.

    This is the constant in the small-gap slope: the gap probability
    satisfies f_n(eps) = 1 - 2 c_n eps + o(eps).  Evaluated through
    log-Gamma so large n stays accurate to ~1e-12 relative.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError(f"c_n is defined for even n >= 2, got {n}")
    log_val = (math.lgamma((n + 1) / 2.0) - math.lgamma(n / 2.0)
               - math.lgamma(0.5) - math.lgamma(1.5))
    return math.exp(log_val)


def c_n_asymptotic_ratio(n: int) -> float:
    """c_n divided by its large-n asymptote sqrt(2n)/pi."""
    return c_n_exact(n) / (math.sqrt(2.0 * n) / math.pi)
