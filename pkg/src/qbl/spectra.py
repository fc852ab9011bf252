"""Symmetric eigenvalues, inertia and fast eigenvalue counting.

Three independent routes to the same counts are kept on purpose:

* LAPACK dense eigensolver (Householder tridiagonalization + QR), the
  primary path behind eigenvalues() / inertia();
* Sturm sign counts on the tridiagonalized matrix (count_below), the
  O(n) counting kernel once the matrix is tridiagonal;
* an in-tree cyclic Jacobi solver used purely as a cross-validation
  oracle in the test suite.

Counting routes must agree exactly on random inputs; that agreement is
an acceptance criterion, not an implementation detail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs

from .ensembles import SymMatrix
from .errors import NumericFailure

_EPS = float(np.finfo(float).eps)
_TINY = float(np.finfo(float).tiny)

_sytrd, _sytrf = get_lapack_funcs(("sytrd", "sytrf"),
                                  (np.zeros((2, 2), dtype=float),))


def default_zero_tol(mat_or_dense) -> float:
    """Scale-aware tolerance 64 * eps * n * ||Q||_F for classifying zeros."""
    if isinstance(mat_or_dense, SymMatrix):
        n = mat_or_dense.order
        fro = mat_or_dense.frobenius_norm()
    else:
        a = np.asarray(mat_or_dense)
        n = a.shape[0]
        fro = float(np.linalg.norm(a))
    return 64.0 * _EPS * n * fro


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues plus the tolerance used to classify zeros."""

    eigenvalues: np.ndarray
    zero_tol: float

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", w)
        if self.zero_tol < 0:
            raise ValueError("zero_tol must be nonnegative")
        if np.any(np.diff(w) < 0):
            raise ValueError("eigenvalues must be sorted ascending")

    @property
    def order(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class Inertia:
    """Eigenvalue sign counts (pos, null, neg) at a given zero tolerance."""

    pos: int
    null: int
    neg: int
    zero_tol: float

    @property
    def order(self) -> int:
        return self.pos + self.null + self.neg

    @property
    def mu(self) -> int:
        """max(pos, neg) -- the larger half of the signature."""
        return max(self.pos, self.neg)

    @property
    def nu(self) -> int:
        """min(pos, neg)."""
        return min(self.pos, self.neg)


def eigenvalues(mat: SymMatrix, zero_tol: float | None = None) -> Spectrum:
    """Full spectrum, ascending.  LAPACK failure raises NumericFailure."""
    if zero_tol is None:
        zero_tol = default_zero_tol(mat)
    dense = mat.dense()
    if not np.all(np.isfinite(dense)):
        raise ValueError("matrix entries must be finite")
    try:
        w = np.linalg.eigvalsh(dense)
    except np.linalg.LinAlgError as exc:  # iteration cap exceeded
        raise NumericFailure(f"symmetric eigensolver failed on order-{mat.order} "
                             f"matrix: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericFailure(f"symmetric eigensolver returned non-finite values "
                             f"on an order-{mat.order} matrix")
    return Spectrum(eigenvalues=w, zero_tol=float(zero_tol))


def spectrum_inertia(spec: Spectrum) -> Inertia:
    w, zt = spec.eigenvalues, spec.zero_tol
    return Inertia(pos=int(np.sum(w > zt)), null=int(np.sum(np.abs(w) <= zt)),
                   neg=int(np.sum(w < -zt)), zero_tol=zt)


def inertia(mat: SymMatrix, zero_tol: float | None = None) -> Inertia:
    """Sign counts of the spectrum with |lambda| <= zero_tol counted as null."""
    return spectrum_inertia(eigenvalues(mat, zero_tol))


def min_abs_eig(mat: SymMatrix) -> float:
    """sigma(Q) = min_i |lambda_i|, the distance of the spectrum to zero."""
    return float(np.min(np.abs(eigenvalues(mat).eigenvalues)))


# ---------------------------------------------------------------------------
# Sturm counting on the tridiagonalized matrix.

def tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction of a dense symmetric matrix to (diag, offdiag)."""
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0]]), np.zeros(0)
    _, d, e, _, info = _sytrd(a)
    if info != 0:
        raise NumericFailure(f"tridiagonalization failed (info={info})")
    return d, e


def sturm_count_below(d: np.ndarray, e: np.ndarray, x: float) -> int:
    """#{eigenvalues < x} of the symmetric tridiagonal matrix (d, e).

    Plain LDL^T sign count; pivots with |pivot| < pivmin are replaced by
    -pivmin (LAPACK's convention), so breakdown never stops the count.
    """
    n = len(d)
    pivmin = _TINY * max(1.0, float(np.max(e * e)) if n > 1 else 1.0)
    count = 0
    q = d[0] - x
    if q < 0:
        count = 1
    for k in range(1, n):
        if abs(q) < pivmin:
            q = -pivmin
        q = d[k] - x - e[k - 1] * e[k - 1] / q
        if q < 0:
            count += 1
    return count


def count_below(mat: SymMatrix, x: float) -> int:
    """#{eigenvalues of Q below x}, via one tridiagonalization + Sturm count."""
    if not np.isfinite(x):
        raise ValueError("x must be finite")
    d, e = tridiagonalize(mat.dense())
    return sturm_count_below(d, e, float(x))


def dense_inertia_sturm(a: np.ndarray, zero_tol: float) -> tuple[int, int, int]:
    """(pos, null, neg) of a dense symmetric array by two Sturm counts."""
    n = a.shape[0]
    d, e = tridiagonalize(a)
    below_lo = sturm_count_below(d, e, -zero_tol)
    below_hi = sturm_count_below(d, e, zero_tol)
    return n - below_hi, below_hi - below_lo, below_lo


# ---------------------------------------------------------------------------
# Bunch-Kaufman inertia: the cheapest exact count, used in pencil scans.

def dense_inertia_ldl(a: np.ndarray, zero_tol: float) -> tuple[int, int, int]:
    """(pos, null, neg) from the LDL^T (Bunch-Kaufman) factorization.

    Sylvester's law makes the inertia of the block-diagonal D equal to
    that of the matrix; 2x2 pivot blocks contribute their own two
    eigenvalues, computed in closed form.
    """
    n = a.shape[0]
    ldu, ipiv, info = _sytrf(a)
    if info < 0:
        raise NumericFailure(f"LDL factorization failed (info={info})")
    pos = null = neg = 0
    k = 0
    while k < n:
        if ipiv[k] > 0:
            lam = ldu[k, k]
            if lam > zero_tol:
                pos += 1
            elif lam < -zero_tol:
                neg += 1
            else:
                null += 1
            k += 1
        else:
            p, q, r = ldu[k, k], ldu[k, k + 1], ldu[k + 1, k + 1]
            half_tr = 0.5 * (p + r)
            disc = np.hypot(0.5 * (p - r), q)
            for lam in (half_tr + disc, half_tr - disc):
                if lam > zero_tol:
                    pos += 1
                elif lam < -zero_tol:
                    neg += 1
                else:
                    null += 1
            k += 2
    return pos, null, neg


# ---------------------------------------------------------------------------
# Jacobi oracle: slow, independent of LAPACK, very accurate.

def jacobi_eigenvalues(mat: SymMatrix, max_sweeps: int = 50,
                       rel_tol: float = 1e-15) -> np.ndarray:
    """Eigenvalues by cyclic Jacobi rotations run to convergence.

    Kept as an independent oracle for the primary eigensolver; O(n^3) per
    sweep and intended for n up to a few hundred in tests.
    """
    a = mat.dense()
    n = a.shape[0]
    if n == 1:
        return a[0, 0:1].copy()
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= rel_tol * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-30 * fro:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
    else:
        raise NumericFailure(f"Jacobi solver did not converge in {max_sweeps} sweeps")
    return np.sort(np.diagonal(a))
