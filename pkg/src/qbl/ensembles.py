"""Sampling of GOE matrices, Weyl quadratic forms and Haar rotations.

A real quadratic form q(x) = sum_{i<=j} c_ij x_i x_j with independent
centered Gaussian coefficients of variance 1 (i = j) and 2 (i < j) is
"Weyl distributed".  Under q(x) = <x, Qx> this is the same object as a
GOE matrix: Gaussian entries, variance 1 on the diagonal and 1/2 off it.
Both samplers below realize that correspondence and are deterministic
functions of a SeedSpec.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import SeedSpec, as_seed


def _packed_length(n: int) -> int:
    return n * (n + 1) // 2


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix stored as its packed upper triangle.

    `packed` holds the entries (i, j) with i <= j in row-major order, so
    asymmetry is unrepresentable.  `order` is the matrix dimension n.
    """

    order: int
    packed: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        p = np.asarray(self.packed, dtype=float)
        if p.shape != (_packed_length(self.order),):
            raise ValueError(
                f"packed length {p.shape} does not match order {self.order}")
        if not np.all(np.isfinite(p)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "packed", p)

    @property
    def dim_sym(self) -> int:
        """Dimension n(n+1)/2 of the ambient space of symmetric matrices."""
        return _packed_length(self.order)

    @classmethod
    def from_dense(cls, a) -> "SymMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
            raise ValueError("matrix is not symmetric")
        n = a.shape[0]
        iu = np.triu_indices(n)
        return cls(order=n, packed=0.5 * (a + a.T)[iu].copy())

    def dense(self) -> np.ndarray:
        n = self.order
        a = np.zeros((n, n))
        a[np.triu_indices(n)] = self.packed
        a = a + np.triu(a, 1).T
        return a

    def entry(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        n = self.order
        return float(self.packed[i * n - i * (i - 1) // 2 + (j - i)])

    def frobenius_norm(self) -> float:
        n = self.order
        diag_idx = np.cumsum(np.r_[0, np.arange(n, 1, -1)])
        d2 = np.sum(self.packed[diag_idx] ** 2)
        return float(np.sqrt(2.0 * np.sum(self.packed**2) - d2))

    def scaled(self, c: float) -> "SymMatrix":
        return SymMatrix(self.order, self.packed * c)

    def __neg__(self) -> "SymMatrix":
        return self.scaled(-1.0)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SymMatrix) and self.order == other.order
                and np.array_equal(self.packed, other.packed))


@dataclass(frozen=True)
class QuadraticForm:
    """Homogeneous degree-two polynomial sum_{i<=j} c_ij x_i x_j."""

    nvars: int
    coeffs: dict[tuple[int, int], float]

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError(f"nvars must be >= 1, got {self.nvars}")
        expected = {(i, j) for i in range(self.nvars) for j in range(i, self.nvars)}
        if set(self.coeffs) != expected:
            raise ValueError("coeffs must contain exactly the pairs i <= j")

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(c * x[i] * x[j] for (i, j), c in self.coeffs.items()))


def form_to_matrix(q: QuadraticForm) -> SymMatrix:
    """Matrix Q with q(x) = <x, Qx>: Q_ii = c_ii, Q_ij = c_ij / 2."""
    n = q.nvars
    a = np.zeros((n, n))
    for (i, j), c in q.coeffs.items():
        a[i, j] = c if i == j else 0.5 * c
    iu = np.triu_indices(n)
    return SymMatrix(order=n, packed=a[iu])


def matrix_to_form(mat: SymMatrix) -> QuadraticForm:
    """Exact inverse of form_to_matrix."""
    n = mat.order
    a = np.zeros((n, n))
    a[np.triu_indices(n)] = mat.packed
    coeffs = {}
    for i in range(n):
        for j in range(i, n):
            coeffs[(i, j)] = a[i, j] if i == j else 2.0 * a[i, j]
    return QuadraticForm(nvars=n, coeffs=coeffs)


def _packed_sigmas(n: int, diag: float, off: float) -> np.ndarray:
    iu = np.triu_indices(n)
    return np.where(iu[0] == iu[1], diag, off)


def sample_goe(n: int, seed) -> SymMatrix:
    """GOE(n) draw: N(0,1) diagonal, N(0,1/2) off-diagonal entries."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = as_seed(seed).generator()
    z = rng.standard_normal(_packed_length(n))
    return SymMatrix(order=n, packed=z * _packed_sigmas(n, 1.0, np.sqrt(0.5)))


def sample_goe_batch(n: int, count: int, seed) -> np.ndarray:
    """`count` independent GOE(n) draws from one stream, as a (count, n, n) array.

    Bit-equal to stacking sample_goe over sub-draws of the same generator;
    used by the vectorized Monte Carlo paths.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = as_seed(seed).generator()
    z = rng.standard_normal((count, _packed_length(n)))
    z *= _packed_sigmas(n, 1.0, np.sqrt(0.5))
    iu = np.triu_indices(n)
    out = np.zeros((count, n, n))
    out[:, iu[0], iu[1]] = z
    out[:, iu[1], iu[0]] = out[:, iu[0], iu[1]]
    return out


def sample_goe_pair(n: int, seed) -> tuple[SymMatrix, SymMatrix]:
    """Two independent GOE(n) draws from one stream (sequential draws)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = as_seed(seed).generator()
    sig = _packed_sigmas(n, 1.0, np.sqrt(0.5))
    z = rng.standard_normal((2, _packed_length(n)))
    return (SymMatrix(order=n, packed=z[0] * sig),
            SymMatrix(order=n, packed=z[1] * sig))


def sample_weyl_quadric(n: int, seed) -> QuadraticForm:
    """Weyl draw: c_ii ~ N(0,1), c_ij ~ N(0,2) for i < j, independent."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = as_seed(seed).generator()
    z = rng.standard_normal(_packed_length(n))
    z *= _packed_sigmas(n, 1.0, np.sqrt(2.0))
    iu = np.triu_indices(n)
    coeffs = {(int(i), int(j)): float(v) for i, j, v in zip(iu[0], iu[1], z)}
    return QuadraticForm(nvars=n, coeffs=coeffs)


def _haar_from_gaussian(g: np.ndarray) -> np.ndarray:
    """QR orthonormalization with the R-diagonal sign fix, then det = +1."""
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * np.where(d >= 0, 1.0, -1.0)[..., None, :]
    det = np.linalg.det(q)
    if q.ndim == 2:
        if det < 0:
            q[0, :] *= -1.0
    else:
        q[det < 0, 0, :] *= -1.0
    return q


def haar_rotation(m: int, seed) -> np.ndarray:
    """Haar-distributed rotation in SO(m).

    Orthonormalizes a Gaussian matrix by QR with positive R diagonal
    (Haar on O(m)), then flips the first row on the det = -1 component,
    which pushes the measure onto SO(m).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    rng = as_seed(seed).generator()
    return _haar_from_gaussian(rng.standard_normal((m, m)))


def haar_rotation_batch(m: int, count: int, seed) -> np.ndarray:
    """`count` Haar rotations from one stream, shape (count, m, m)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    rng = as_seed(seed).generator()
    return _haar_from_gaussian(rng.standard_normal((count, m, m)))
