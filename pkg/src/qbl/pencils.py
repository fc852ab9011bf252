"""Two-quadric analysis: index function on the pencil circle, spectral
variety counting, and the total Betti number of the intersection.

A pencil span{q1, q2} is parametrized by the circle M(theta) =
cos(theta) Q1 + sin(theta) Q2.  Because M(theta + pi) = -M(theta), all
structure is determined on [0, pi): the angles where M is singular (the
"crossings"), and the positive index i+ on each open arc between them.
The index jumps by exactly +-1 at a generic crossing, i+(theta) +
i+(theta + pi) = n away from crossings, and the total Betti number of
{q1 = q2 = 0} in RP^(n-1) is assembled from the arc structure in two
independent ways (a closed form and a term-by-term ledger) that must
agree.

Two crossing-detection engines are provided:

* "grid": uniform sampling of i+ over [0, pi) with adaptive bisection of
  every cell whose endpoints disagree -- the reference algorithm;
* "eig": the singular angles are the real eigenvalues of -Q2^(-1) Q1 in
  the tangent chart, found by one dense eigensolve.  Much faster for
  large n and cross-validated against the grid engine.

Non-generic samples (unresolved multi-jumps, singular plateaus,
near-tangent crossing pairs) are flagged `discarded`; callers resample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .ensembles import SymMatrix
from .errors import NumericFailure, SampleDiscarded
from .seeding import as_seed
from .spectra import dense_inertia_ldl, dense_inertia_sturm, default_zero_tol

_EPS = float(np.finfo(float).eps)

# Deterministic basis-rotation ladder used when a chart needs det(Q2) != 0.
_CHART_ANGLES = (0.0, 0.7853981633974483, 0.5574077246549021, 1.9106332362490186)


@dataclass(frozen=True)
class Pencil:
    """Span of two independent quadratic forms of the same order."""

    q1: SymMatrix
    q2: SymMatrix

    def __post_init__(self):
        if self.q1.order != self.q2.order:
            raise ValueError("pencil members must have the same order")
        a = self.q1.packed
        b = self.q2.packed
        # Frobenius Gram determinant; ~0 iff the forms are proportional.
        na2 = 2.0 * a @ a
        nb2 = 2.0 * b @ b
        ab = 2.0 * a @ b
        if na2 == 0.0 or nb2 == 0.0 or na2 * nb2 - ab * ab <= 1e-24 * na2 * nb2:
            raise ValueError("pencil members are proportional (span is not 2d)")

    @property
    def order(self) -> int:
        return self.q1.order


def rotate_basis(p: Pencil, phi: float) -> Pencil:
    """New basis (cos phi q1 + sin phi q2, -sin phi q1 + cos phi q2).

    Spans the same pencil; crossings shift by -phi modulo pi.
    """
    c, s = np.cos(phi), np.sin(phi)
    return Pencil(
        q1=SymMatrix(p.order, c * p.q1.packed + s * p.q2.packed),
        q2=SymMatrix(p.order, -s * p.q1.packed + c * p.q2.packed),
    )


@dataclass(frozen=True)
class PencilScan:
    """Index-function barcode of a pencil over the circle.

    crossings: singular angles in [0, pi), ascending.  The full circle
    has the antipodal copies too; arc_index[k] is i+ on the open arc
    between full-circle crossing k and k+1 (starting at crossings[0],
    cyclically), so len(arc_index) == 2 * len(crossings).  A scan with no
    crossings has constant index and arc_index == [mu].
    """

    order: int
    crossings: np.ndarray
    arc_index: tuple[int, ...]
    mu: int
    min_index: int
    sigma_count: int
    index_constant: bool
    discarded: bool
    discard_reason: str | None = None


def _index_at(a: np.ndarray, b: np.ndarray, theta: float, zero_tol: float,
              use_sturm: bool = False) -> tuple[int, int]:
    """(pos, null) of cos(theta) A + sin(theta) B."""
    m = np.cos(theta) * a + np.sin(theta) * b
    if use_sturm:
        pos, null, _ = dense_inertia_sturm(m, zero_tol)
    else:
        pos, null, _ = dense_inertia_ldl(m, zero_tol)
    return pos, null


def _index_nonsingular(a, b, theta, zero_tol, cell, use_sturm):
    """Index at theta, nudging deterministically off singular points.

    Returns (pos, theta_used) or None if the pencil looks singular on a
    whole neighborhood (non-generic input).
    """
    t = theta
    for attempt in range(4):
        pos, null = _index_at(a, b, t, zero_tol, use_sturm)
        if null == 0:
            return pos, t
        t = theta + cell * 1e-3 * (attempt + 1)
    return None


def _discarded_scan(n: int, reason: str) -> PencilScan:
    return PencilScan(order=n, crossings=np.array([]), arc_index=(),
                      mu=0, min_index=0, sigma_count=0, index_constant=False,
                      discarded=True, discard_reason=reason)


def _assemble_scan(a: np.ndarray, b: np.ndarray, crossings: np.ndarray,
                   zero_tol: float, use_sturm: bool = False) -> PencilScan:
    """Build and validate the arc structure given the crossing angles."""
    n = a.shape[0]
    m = len(crossings)

    if m != 0:
        # Simple crossings only: a generic pencil never has two singular
        # angles closer than the refinement scale.
        gaps = np.diff(np.r_[crossings, crossings[0] + np.pi])
        if np.min(gaps) < 1e-9:
            return _discarded_scan(n, "near-coincident crossings")
    if m % 2 != n % 2:
        # det(M) is an n-homogeneous trigonometric polynomial, so its root
        # count on [0, pi) has the parity of n; a mismatch means the grid
        # missed a crossing pair.
        return _discarded_scan(n, "crossing-count parity violation")

    if m == 0:
        res = _index_nonsingular(a, b, np.pi / 4, zero_tol, np.pi / 4, use_sturm)
        if res is None:
            return _discarded_scan(n, "singular plateau")
        v, _ = res
        if 2 * v != n:
            return _discarded_scan(n, "constant index inconsistent with antipode")
        return PencilScan(order=n, crossings=np.array([]), arc_index=(v,),
                          mu=v, min_index=v, sigma_count=0,
                          index_constant=True, discarded=False)

    full = np.r_[crossings, crossings + np.pi]
    arc_vals = []
    for k in range(2 * m):
        lo = full[k]
        hi = full[k + 1] if k + 1 < 2 * m else full[0] + 2 * np.pi
        res = _index_nonsingular(a, b, 0.5 * (lo + hi), zero_tol,
                                 (hi - lo) / 8.0, use_sturm)
        if res is None:
            return _discarded_scan(n, "singular arc midpoint")
        arc_vals.append(res[0])

    for k in range(2 * m):
        if abs(arc_vals[k] - arc_vals[(k + 1) % (2 * m)]) != 1:
            return _discarded_scan(n, "index jump != +-1 across a crossing")
        if arc_vals[k] + arc_vals[(k + m) % (2 * m)] != n:
            return _discarded_scan(n, "antipodal index rule violated")

    mu = max(arc_vals)
    return PencilScan(order=n, crossings=crossings, arc_index=tuple(arc_vals),
                      mu=mu, min_index=min(arc_vals), sigma_count=2 * m,
                      index_constant=False, discarded=False)


def scan_index_function(p: Pencil, grid_size: int | None = None,
                        refine_tol: float = 1e-10,
                        zero_tol: float | None = None,
                        use_sturm: bool = False) -> PencilScan:
    """Locate the crossings by uniform sampling plus adaptive bisection.

    The determinant along the pencil has at most n zeros in [0, pi), so
    the default grid of 8n cells oversamples eightfold; every cell whose
    endpoint indices differ is bisected down to refine_tol and yields one
    crossing per unit of jump.  Jumps that stay > 1 at full resolution
    mark a non-generic sample and set `discarded`.
    """
    n = p.order
    if grid_size is None:
        grid_size = 8 * n
    if grid_size < 8 * n:
        raise ValueError(f"grid_size must be >= 8n = {8 * n}, got {grid_size}")
    a = p.q1.dense()
    b = p.q2.dense()
    if zero_tol is None:
        zero_tol = 64.0 * _EPS * n * (np.linalg.norm(a) + np.linalg.norm(b))

    cell = np.pi / grid_size
    thetas = np.empty(grid_size + 1)
    values = np.empty(grid_size + 1, dtype=int)
    for k in range(grid_size):
        res = _index_nonsingular(a, b, k * cell, zero_tol, cell, use_sturm)
        if res is None:
            return _discarded_scan(n, "singular plateau on the grid")
        values[k], thetas[k] = res
    # M(pi) = -M(0): the wrap value needs no extra factorization.
    thetas[grid_size] = thetas[0] + np.pi
    values[grid_size] = n - values[0]

    crossings: list[float] = []
    max_evals = 64 * grid_size
    evals = 0
    for k in range(grid_size):
        if values[k] == values[k + 1]:
            continue
        stack = [(thetas[k], values[k], thetas[k + 1], values[k + 1])]
        while stack:
            lo, vlo, hi, vhi = stack.pop()
            if vlo == vhi:
                continue
            if hi - lo <= refine_tol:
                if abs(vhi - vlo) == 1:
                    crossings.append(0.5 * (lo + hi))
                    continue
                return _discarded_scan(n, "unresolved multi-jump")
            evals += 1
            if evals > max_evals:
                return _discarded_scan(n, "refinement budget exceeded")
            mid = 0.5 * (lo + hi)
            vmid, _ = _index_at(a, b, mid, zero_tol, use_sturm)
            stack.append((lo, vlo, mid, vmid))
            stack.append((mid, vmid, hi, vhi))

    crossings_arr = np.sort(np.mod(np.array(crossings), np.pi))
    return _assemble_scan(a, b, crossings_arr, zero_tol, use_sturm)


def _crossing_angles_eig(a: np.ndarray, b: np.ndarray,
                         imag_tol: float = 1e-9) -> np.ndarray:
    """Singular angles in [0, pi) as real eigenvalues in a tangent chart."""
    n = a.shape[0]
    for phi in _CHART_ANGLES:
        c, s = np.cos(phi), np.sin(phi)
        a1 = c * a + s * b
        b1 = -s * a + c * b
        try:
            lu, piv = sla.lu_factor(b1, check_finite=False)
        except sla.LinAlgError:
            continue
        udiag = np.abs(np.diagonal(lu))
        if udiag.min() <= 1e-12 * max(udiag.max(), 1e-300):
            continue  # chart too close to singular; rotate and retry
        lam = np.linalg.eigvals(sla.lu_solve((lu, piv), a1, check_finite=False))
        real = np.abs(lam.imag) <= imag_tol * (1.0 + np.abs(lam))
        t = -lam[real].real
        return np.sort(np.mod(np.arctan(t) + phi, np.pi))
    raise NumericFailure(f"no valid tangent chart found for an order-{n} pencil")


def scan_pencil_fast(p: Pencil, zero_tol: float | None = None) -> PencilScan:
    """Same output as scan_index_function via the eigenvalue engine.

    Falls back to the grid engine whenever the assembled arc structure
    fails its internal consistency checks, so a non-discarded result is
    always validated.
    """
    n = p.order
    a = p.q1.dense()
    b = p.q2.dense()
    if zero_tol is None:
        zero_tol = 64.0 * _EPS * n * (np.linalg.norm(a) + np.linalg.norm(b))
    try:
        crossings = _crossing_angles_eig(a, b)
    except NumericFailure:
        return scan_index_function(p, zero_tol=zero_tol)
    scan = _assemble_scan(a, b, crossings, zero_tol)
    if scan.discarded:
        return scan_index_function(p, zero_tol=zero_tol)
    return scan


def scan_pencil(p: Pencil, method: str = "grid", **kwargs) -> PencilScan:
    if method == "grid":
        return scan_index_function(p, **kwargs)
    if method == "eig":
        return scan_pencil_fast(p, zero_tol=kwargs.get("zero_tol"))
    raise ValueError(f"unknown scan method {method!r}")


# ---------------------------------------------------------------------------
# Independent crossing-count oracle: determinant interpolation + Sturm chains.

def _sturm_chain_real_roots(coeffs: np.ndarray, zero_tol: float = 1e-10) -> int:
    """Number of distinct real roots of a polynomial via its Sturm chain.

    coeffs ascending.  Chain elements are rescaled to unit max-norm
    (positive scaling preserves signs); a remainder vanishing below
    zero_tol after rescaling signals a repeated root, which the callers
    treat as a chart failure.
    """
    P = np.polynomial.polynomial
    c = np.array(coeffs, dtype=float)
    c = P.polytrim(c, tol=zero_tol * max(1.0, np.abs(c).max()))
    if len(c) <= 1:
        return 0
    c /= np.abs(c).max()
    chain = [c, P.polyder(c) / max(np.abs(P.polyder(c)).max(), 1e-300)]
    while len(chain[-1]) > 1:
        _, rem = P.polydiv(chain[-2], chain[-1])
        rem = P.polytrim(rem, tol=zero_tol)
        if len(rem) == 1 and rem[0] == 0.0:
            raise NumericFailure("Sturm chain terminated: repeated roots suspected")
        if np.abs(rem).max() <= zero_tol:
            raise NumericFailure("Sturm chain remainder underflow")
        chain.append(-rem / np.abs(rem).max())

    def sign_changes(signs):
        s = [x for x in signs if x != 0]
        return sum(1 for u, v in zip(s, s[1:]) if u * v < 0)

    deg = [len(q) - 1 for q in chain]
    lead = [np.sign(q[-1]) for q in chain]
    at_plus = lead
    at_minus = [l * (-1) ** d for l, d in zip(lead, deg)]
    return sign_changes(at_minus) - sign_changes(at_plus)


def spectral_variety_count_oracle(p: Pencil, seed=0, max_retries: int = 5) -> int:
    """b(Sigma_W): twice the number of real roots of det(Q1 + t Q2).

    Independent of the scans: the degree <= n determinant polynomial is
    recovered by interpolation at n+1 Chebyshev nodes and its real roots
    are counted with Sturm's theorem.  The basis is rotated by a random
    angle (seeded, bounded retries) until the tangent chart is valid.
    """
    n = p.order
    rng = as_seed(seed).generator()
    pencil = p
    for attempt in range(max_retries):
        a = pencil.q1.dense()
        b = pencil.q2.dense()
        nodes = np.cos(np.pi * (2 * np.arange(n + 1) + 1) / (2.0 * (n + 1)))
        dets = np.array([np.linalg.det(a + t * b) for t in nodes])
        cheb = np.polynomial.chebyshev.chebfit(nodes, dets, n)
        coeffs = np.polynomial.chebyshev.cheb2poly(cheb)
        coeffs = np.r_[coeffs, np.zeros(n + 1 - len(coeffs))]
        # Leading coefficient is det(Q2); if it drowned in interpolation
        # noise the chart misses roots near theta = pi/2: rotate the basis.
        if abs(coeffs[-1]) > 1e-10 * max(np.abs(coeffs).max(), 1e-300):
            try:
                return 2 * _sturm_chain_real_roots(coeffs)
            except NumericFailure:
                pass
        pencil = rotate_basis(p, rng.uniform(0.3, np.pi - 0.3))
    raise NumericFailure(f"no valid chart after {max_retries} basis rotations")


# ---------------------------------------------------------------------------
# Spectral-sequence corner terms and the two Betti formulas.

def c_plus_d(scan: PencilScan) -> int:
    """The corner contribution c + d in {0, 1, 2} from the arc structure.

    Non-constant index: the top level set is a union of arcs, so the
    contribution is 1.  Constant index (n even, index n/2): the positive
    eigenspace bundle over the circle is a sum of n/2 Moebius bands, so
    the parity of n/2 decides between 0 and 2.
    """
    if scan.discarded:
        raise ValueError("scan was discarded; resample instead of reusing it")
    if not scan.index_constant:
        return 1
    half = scan.order // 2
    return 0 if half % 2 == 1 else 2


def rank_d2(scan: PencilScan) -> int:
    """Rank (0 or 1) of the second differential: nonzero only when the
    index is constant and n/2 is odd (the Moebius parity case)."""
    if scan.discarded:
        raise ValueError("scan was discarded; resample instead of reusing it")
    if not scan.index_constant:
        return 0
    return (scan.order // 2) % 2


def omega_component_counts(scan: PencilScan) -> list[int]:
    """b_0 of the superlevel sets {i+ >= j+1} for j = min_index..mu-1.

    Each superlevel set is a union of full-circle arcs; adjacent
    qualifying arcs share their crossing point (where the index is the
    smaller of the two sides), so components are maximal cyclic runs.
    """
    if scan.discarded:
        raise ValueError("scan was discarded")
    counts = []
    vals = scan.arc_index
    k = len(vals)
    for j in range(scan.min_index, scan.mu):
        level = j + 1
        qual = [v >= level for v in vals]
        if all(qual):
            counts.append(1)
            continue
        runs = 0
        for i in range(k):
            if qual[i] and not qual[(i - 1) % k]:
                runs += 1
        counts.append(runs)
    return counts


@dataclass(frozen=True)
class TwoQuadricBetti:
    """Total Betti number of a two-quadric intersection, both routes.

    total_betti is the closed form 3n - 1 - 4 mu + (c+d) + sigma/2
    (clamped at zero, flagged); ledger_betti retraces the spectral
    sequence rank term by term.  They must agree away from the
    constant-index edge case.
    """

    total_betti: int
    ledger_betti: int
    c_plus_d: int
    rank_d2: int
    sigma_count: int
    mu: int
    constant_index: bool
    clamped: bool


def betti_two_quadrics(p: Pencil, scan: PencilScan | None = None,
                       method: str = "grid", **scan_kwargs) -> TwoQuadricBetti:
    """Both Betti formulas for span{q1, q2}; raises SampleDiscarded on a
    non-generic scan so Monte Carlo callers can redraw."""
    if scan is None:
        scan = scan_pencil(p, method=method, **scan_kwargs)
    if scan.discarded:
        raise SampleDiscarded(scan.discard_reason or "non-generic pencil")
    n = scan.order
    cd = c_plus_d(scan)
    closed = 3 * n - 1 - 4 * scan.mu + cd + scan.sigma_count // 2
    ledger = ((n - 1) - 2 * (scan.mu - scan.min_index) + cd
              + sum(omega_component_counts(scan)))
    clamped = closed < 0
    return TwoQuadricBetti(total_betti=max(closed, 0), ledger_betti=ledger,
                           c_plus_d=cd, rank_d2=rank_d2(scan),
                           sigma_count=scan.sigma_count, mu=scan.mu,
                           constant_index=scan.index_constant, clamped=clamped)


def mu_sandwich_check(p: Pencil, scan: PencilScan) -> bool:
    """i+(Q1) <= mu_W <= i+(Q1) + b(Sigma_W), asserted per trial."""
    from .spectra import inertia

    ip1 = inertia(p.q1).pos
    return ip1 <= scan.mu <= ip1 + scan.sigma_count


def alexander_count_check(scan: PencilScan) -> bool:
    """Sum of superlevel component counts equals half the crossing count."""
    return sum(omega_component_counts(scan)) == scan.sigma_count // 2
