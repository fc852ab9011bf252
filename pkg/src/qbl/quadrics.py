"""Topology of a single quadric hypersurface and its Crofton volume estimate.

Ambient convention used throughout the library: n is the number of
variables and the zero locus X of a form on R^n lives in RP^(n-1).
complex_betti_one_quadric is the one place indexed by the ambient
projective dimension instead, and says so explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import SymMatrix, sample_goe_batch, haar_rotation_batch
from .seeding import as_seed
from .spectra import inertia

_CHUNK = 4096


@dataclass(frozen=True)
class BettiResult:
    """Total Z2 Betti number of {q = 0} in RP^(n-1), with its signature max.

    For a nondegenerate form the zero locus is diffeomorphic to a sign-split
    sphere bundle and total_betti = 2(n - mu).  Degenerate inputs (null
    eigenvalues within tolerance) carry no Betti claim, only the flag.
    """

    total_betti: int
    mu: int
    degenerate: bool


def betti_one_quadric(mat: SymMatrix, zero_tol: float | None = None) -> BettiResult:
    """b(X) = 2(n - max(pos, neg)) for a nondegenerate quadric in RP^(n-1)."""
    if mat.order < 2:
        raise ValueError("the zero locus lives in RP^(n-1); need order >= 2")
    inr = inertia(mat, zero_tol)
    if inr.null > 0:
        return BettiResult(total_betti=0, mu=inr.mu, degenerate=True)
    return BettiResult(total_betti=2 * (mat.order - inr.mu), mu=inr.mu,
                       degenerate=False)


def complex_betti_one_quadric(n_ambient: int) -> int:
    """Total Betti number of a smooth quadric in CP^n_ambient.

    Equals n + (1 + (-1)^(n+1))/2: the middle cohomology picks up one
    extra class in even complex dimension.
    """
    if n_ambient < 1:
        raise ValueError(f"n_ambient must be >= 1, got {n_ambient}")
    return n_ambient + (1 + (-1) ** (n_ambient + 1)) // 2


def binary_projective_root_count(mat2: np.ndarray, zero_tol: float = 0.0) -> int:
    """Real projective roots (0, 1 or 2) of the binary form <x, Bx>, x in RP^1.

    The count is decided by the sign of det(B): negative determinant means
    an indefinite form with two distinct root directions, positive means
    none, zero (within tolerance) a double root.
    """
    det = mat2[0, 0] * mat2[1, 1] - mat2[0, 1] * mat2[1, 0]
    if det < -zero_tol:
        return 2
    if det > zero_tol:
        return 0
    return 1


def crofton_volume_estimate(mat: SymMatrix, n_lines: int, seed) -> float:
    """Average number of real zeros of q on random projective lines.

    Each line is the image of the fixed plane span{e_1, e_2} under a Haar
    rotation; the restricted 2x2 form decides the root count through its
    determinant sign.  The mean estimates Vol(X) / Vol(RP^(n-2)).
    """
    if mat.order < 3:
        raise ValueError("need n >= 3 so that lines embed in RP^(n-1)")
    if n_lines < 1:
        raise ValueError("n_lines must be >= 1")
    seed = as_seed(seed)
    a = mat.dense()
    total = 0
    done = 0
    chunk_idx = 0
    while done < n_lines:
        b = min(_CHUNK, n_lines - done)
        rot = haar_rotation_batch(mat.order, b, seed.child(chunk_idx))
        planes = rot[:, :, :2]
        restricted = np.einsum("bij,bik->bjk", planes, a @ planes)
        dets = (restricted[:, 0, 0] * restricted[:, 1, 1]
                - restricted[:, 0, 1] * restricted[:, 1, 0])
        total += 2 * int(np.sum(dets < 0)) + int(np.sum(dets == 0))
        done += b
        chunk_idx += 1
    return total / n_lines


def crofton_resampled_mean(n: int, n_lines: int, seed) -> tuple[float, float]:
    """Mean root count over random lines with the quadric redrawn per line.

    Returns (mean, stderr).  With a Weyl form redrawn each trial the
    restriction to any plane is a binary Weyl form, so the mean estimates
    the expected root count sqrt(2) of a random binary quadric.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    seed = as_seed(seed)
    counts_pos = 0
    counts_dbl = 0
    done = 0
    chunk_idx = 0
    sumsq = 0.0
    while done < n_lines:
        b = min(_CHUNK, n_lines - done)
        mats = sample_goe_batch(n, b, seed.child(2 * chunk_idx))
        rot = haar_rotation_batch(n, b, seed.child(2 * chunk_idx + 1))
        planes = rot[:, :, :2]
        restricted = np.einsum("bij,bik->bjk", planes,
                               np.matmul(mats, planes))
        dets = (restricted[:, 0, 0] * restricted[:, 1, 1]
                - restricted[:, 0, 1] * restricted[:, 1, 0])
        counts_pos += int(np.sum(dets < 0))
        counts_dbl += int(np.sum(dets == 0))
        done += b
        chunk_idx += 1
    mean = (2.0 * counts_pos + counts_dbl) / n_lines
    sumsq = 4.0 * counts_pos + counts_dbl
    var = sumsq / n_lines - mean * mean
    stderr = float(np.sqrt(max(var, 0.0) / n_lines))
    return mean, stderr
