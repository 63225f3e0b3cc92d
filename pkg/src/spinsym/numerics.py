"""Self-contained numerical kernels.

Finite-difference discretization of radial eigenproblems on a uniform grid
with Dirichlet ends, symmetric tridiagonal / banded eigensolvers (Sturm
bisection plus inverse iteration), Gauss-Legendre quadrature and the
confluent hypergeometric function 1F1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform radial grid: nodes h, 2h, ..., M h with (M+1) h = rmax."""

    rmax: float
    m: int

    def __post_init__(self):
        if self.m < 64:
            raise ValueError("grid needs at least 64 points")
        if self.rmax <= 0:
            raise ValueError("rmax must be positive")

    @property
    def h(self):
        return self.rmax / (self.m + 1)

    @property
    def rmin(self):
        return self.h

    def nodes(self):
        h = self.h
        return h * np.arange(1, self.m + 1)

    def refined(self):
        """Grid with spacing h/2 on the same interval."""
        return Grid(self.rmax, 2 * self.m + 1)


def default_box(ehat_estimate, factor=40.0):
    """r_max = factor / sqrt(-Ehat): resolves exp(-sqrt(-Ehat) r) tails."""
    if ehat_estimate >= 0:
        raise ValueError("need a negative bound-state energy estimate")
    return factor / math.sqrt(-ehat_estimate)


# ---------------------------------------------------------------------------
# Sturm bisection + inverse iteration, tridiagonal case
# ---------------------------------------------------------------------------


def _sturm_counts(diag, off2, shifts):
    """Number of eigenvalues below each shift (vectorized over shifts)."""
    n = diag.shape[0]
    shifts = np.asarray(shifts, dtype=float)
    tiny = 1e-300
    with np.errstate(over="ignore", divide="ignore"):
        q = diag[0] - shifts
        q = np.where(q == 0.0, -tiny, q)
        count = (q < 0).astype(np.int64)
        for i in range(1, n):
            q = diag[i] - shifts - off2[i - 1] / q
            q = np.where(q == 0.0, -tiny, q)
            count += q < 0
    return count


def _thomas_solve(diag, off, rhs, shift):
    """Solve (T - shift I) x = rhs with partial pivoting (dgtsv style)."""
    n = diag.shape[0]
    d = diag - shift
    dl = off.copy()
    du = off.copy()
    du2 = np.zeros(max(n - 2, 0))
    x = rhs.astype(float).copy()
    d = d.copy()
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = 1e-300
            m = dl[i] / d[i]
            d[i + 1] -= m * du[i]
            x[i + 1] -= m * x[i]
            if i < n - 2:
                du2[i] = 0.0
        else:
            m = d[i] / dl[i]
            d[i], dl[i] = dl[i], d[i]
            tmp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = tmp - m * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -m * du[i + 1]
            x[i], x[i + 1] = x[i + 1], x[i] - m * x[i + 1]
    if d[n - 1] == 0.0:
        d[n - 1] = 1e-300
    x[n - 1] /= d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return x


def tridiag_eig(diag, off, k, tol=1e-13):
    """k lowest eigenpairs of the symmetric tridiagonal (diag, off).

    Bisection on Sturm counts refines each eigenvalue; inverse iteration
    recovers vectors.  Deterministic and scipy-free.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = diag.shape[0]
    if k > n:
        raise ValueError("asked for more eigenvalues than the matrix has")
    off2 = off * off
    radius = np.abs(diag).copy()
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    lo = float(np.min(diag - radius)) - 1.0
    hi = float(np.max(diag + radius)) + 1.0
    scale = max(abs(lo), abs(hi), 1.0)

    lows = np.full(k, lo)
    highs = np.full(k, hi)
    targets = np.arange(1, k + 1)
    while np.max(highs - lows) > tol * scale:
        mids = 0.5 * (lows + highs)
        counts = _sturm_counts(diag, off2, mids)
        below = counts >= targets
        highs = np.where(below, mids, highs)
        lows = np.where(below, lows, mids)
    values = 0.5 * (lows + highs)

    vectors = np.empty((n, k))
    rng = np.random.default_rng(12345)
    for j in range(k):
        shift = values[j] + 10 * tol * scale
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        for _ in range(3):
            v = _thomas_solve(diag, off, v, shift)
            for jj in range(j):
                if abs(values[jj] - values[j]) < 1e-8 * scale:
                    v -= np.dot(vectors[:, jj], v) * vectors[:, jj]
            v /= np.linalg.norm(v)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        vectors[:, j] = v
        # Rayleigh-quotient polish sharpens bisection to near machine accuracy
        tv = diag * v
        tv[:-1] += off * v[1:]
        tv[1:] += off * v[:-1]
        values[j] = float(np.dot(v, tv))
    order = np.argsort(values)
    return values[order], vectors[:, order]


# ---------------------------------------------------------------------------
# block-tridiagonal case (two interleaved channels; 2x2 blocks, scalar
# off-diagonal blocks b*I from the Laplacian stencil)
# ---------------------------------------------------------------------------


def _block_inertia(p, q, w, b, shifts):
    """Eigenvalues below each shift for the block-tridiagonal matrix.

    Diagonal blocks are [[p_i, w_i], [w_i, q_i]], off-diagonal blocks b*I.
    Sylvester inertia accumulated from the 2x2 Schur complements; vectorized
    over shifts.
    """
    shifts = np.asarray(shifts, dtype=float)
    ns = shifts.shape[0]
    count = np.zeros(ns, dtype=np.int64)
    b2 = b * b
    tiny = 1e-300
    s00 = np.zeros(ns)
    s01 = np.zeros(ns)
    s11 = np.zeros(ns)
    have_prev = False
    for i in range(p.shape[0]):
        a00 = p[i] - shifts
        a11 = q[i] - shifts
        a01 = np.full(ns, w[i])
        if have_prev:
            det = s00 * s11 - s01 * s01
            det = np.where(det == 0.0, tiny, det)
            # b^2 * inv(S_prev)
            a00 = a00 - b2 * s11 / det
            a11 = a11 - b2 * s00 / det
            a01 = a01 + b2 * s01 / det
        det = a00 * a11 - a01 * a01
        det = np.where(det == 0.0, -tiny, det)
        count += np.where(det < 0, 1, np.where(a00 + a11 < 0, 2, 0))
        s00, s01, s11 = a00, a01, a11
        have_prev = True
    return count


def _block_solve(p, q, w, b, shift, rhs):
    """Block-Thomas solve of (A - shift I) x = rhs (2x2 pivots)."""
    m = p.shape[0]
    s00 = np.empty(m)
    s01 = np.empty(m)
    s11 = np.empty(m)
    y = rhs.reshape(m, 2).astype(float).copy()
    b2 = b * b
    tiny = 1e-300
    for i in range(m):
        a00 = p[i] - shift
        a11 = q[i] - shift
        a01 = w[i]
        if i:
            det = s00[i - 1] * s11[i - 1] - s01[i - 1] ** 2
            if det == 0.0:
                det = tiny
            a00 -= b2 * s11[i - 1] / det
            a11 -= b2 * s00[i - 1] / det
            a01 += b2 * s01[i - 1] / det
            det_prev = det
            # y_i <- y_i - b * S_{i-1}^{-1} y_{i-1}
            g0 = (s11[i - 1] * y[i - 1, 0] - s01[i - 1] * y[i - 1, 1]) / det_prev
            g1 = (-s01[i - 1] * y[i - 1, 0] + s00[i - 1] * y[i - 1, 1]) / det_prev
            y[i, 0] -= b * g0
            y[i, 1] -= b * g1
        s00[i], s01[i], s11[i] = a00, a01, a11
    x = np.empty((m, 2))
    det = s00[m - 1] * s11[m - 1] - s01[m - 1] ** 2
    if det == 0.0:
        det = tiny
    x[m - 1, 0] = (s11[m - 1] * y[m - 1, 0] - s01[m - 1] * y[m - 1, 1]) / det
    x[m - 1, 1] = (-s01[m - 1] * y[m - 1, 0] + s00[m - 1] * y[m - 1, 1]) / det
    for i in range(m - 2, -1, -1):
        r0 = y[i, 0] - b * x[i + 1, 0]
        r1 = y[i, 1] - b * x[i + 1, 1]
        det = s00[i] * s11[i] - s01[i] ** 2
        if det == 0.0:
            det = tiny
        x[i, 0] = (s11[i] * r0 - s01[i] * r1) / det
        x[i, 1] = (-s01[i] * r0 + s00[i] * r1) / det
    return x.reshape(2 * m)


def block_tridiag_eig(p, q, w, b, k, tol=1e-13):
    """k lowest eigenpairs of the two-channel block-tridiagonal matrix."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    bound = float(np.max(np.abs(p) + np.abs(w) + 2 * abs(b)))
    bound = max(bound, float(np.max(np.abs(q) + np.abs(w) + 2 * abs(b))))
    lo, hi = -bound - 1.0, bound + 1.0
    scale = max(abs(lo), abs(hi), 1.0)

    lows = np.full(k, lo)
    highs = np.full(k, hi)
    targets = np.arange(1, k + 1)
    while np.max(highs - lows) > tol * scale:
        mids = 0.5 * (lows + highs)
        counts = _block_inertia(p, q, w, b, mids)
        below = counts >= targets
        highs = np.where(below, mids, highs)
        lows = np.where(below, lows, mids)
    values = 0.5 * (lows + highs)

    n = 2 * p.shape[0]
    vectors = np.empty((n, k))
    rng = np.random.default_rng(54321)
    for j in range(k):
        shift = values[j] + 10 * tol * scale
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        for _ in range(3):
            v = _block_solve(p, q, w, b, shift, v)
            for jj in range(j):
                if abs(values[jj] - values[j]) < 1e-8 * scale:
                    v -= np.dot(vectors[:, jj], v) * vectors[:, jj]
            v /= np.linalg.norm(v)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        vectors[:, j] = v
        vv = v.reshape(-1, 2)
        av = np.empty_like(vv)
        av[:, 0] = p * vv[:, 0] + w * vv[:, 1]
        av[:, 1] = w * vv[:, 0] + q * vv[:, 1]
        av[:-1] += b * vv[1:]
        av[1:] += b * vv[:-1]
        values[j] = float(np.dot(v, av.reshape(-1)))
    order = np.argsort(values)
    return values[order], vectors[:, order]


# ---------------------------------------------------------------------------
# finite-difference radial solvers
# ---------------------------------------------------------------------------


@dataclass
class EigenResult:
    values: np.ndarray          # Richardson-extrapolated eigenvalues
    values_coarse: np.ndarray
    values_fine: np.ndarray
    vectors: np.ndarray         # fine-grid eigenvectors, l2-normalized
    grid: Grid                  # fine grid
    order_estimate: float | None = None


def _discretize_single(vfunc, grid):
    r = grid.nodes()
    h = grid.h
    diag = 2.0 / h**2 + vfunc(r)
    off = np.full(grid.m - 1, -1.0 / h**2)
    return diag, off


def _discretize_regularized(vfunc, grid, c2, s):
    """Conservative stencil after the substitution u = r^s w.

    For potentials c2/r^2 + tail the transformed problem
    -(r^{2s} w')'/r^{2s} + tail(r) w = E w is regular at the origin
    (s(s-1) = c2, s the positive root), and the symmetrizing similarity
    brings the matrix back to the original u values.  Restores O(h^2)
    convergence in the limit-circle window -1/4 < c2 < 3/4 where the plain
    Dirichlet stencil degrades to O(h^{2s-1}).
    """
    r = grid.nodes()
    h = grid.h
    tail = vfunc(r) - c2 / r**2
    rho_plus = (r + h / 2) ** (2 * s)
    rho_minus = (r - h / 2) ** (2 * s)
    rho = r ** (2 * s)
    diag = (rho_plus + rho_minus) / (h**2 * rho) + tail
    # regularity at the origin: zero flux through r = h/2
    diag[0] = rho_plus[0] / (h**2 * rho[0]) + tail[0]
    off = -rho_plus[:-1] / (h**2 * np.sqrt(rho[:-1] * rho[1:]))
    return diag, off


def solve_radial_fd(vfunc, grid: Grid, k: int, estimate_order=False,
                    singular_exponent=None):
    """k lowest states of -d^2/dr^2 + v(r) with Dirichlet conditions.

    Solves on the given grid and its h/2 refinement, Richardson-extrapolates
    the eigenvalues, optionally estimates the observed convergence order from
    an additional h/4 pass.  Passing singular_exponent = (c2, s) switches to
    the origin-regularized stencil for barriers with s < 3/2.
    """

    def build(g):
        if singular_exponent is None:
            return _discretize_single(vfunc, g)
        return _discretize_regularized(vfunc, g, *singular_exponent)

    d_c, o_c = build(grid)
    vals_c, _ = tridiag_eig(d_c, o_c, k)
    fine = grid.refined()
    d_f, o_f = build(fine)
    vals_f, vecs_f = tridiag_eig(d_f, o_f, k)
    extrap = (4.0 * vals_f - vals_c) / 3.0
    order = None
    if estimate_order:
        finest = fine.refined()
        d_ff, o_ff = build(finest)
        vals_ff, _ = tridiag_eig(d_ff, o_ff, k)
        num = np.abs(vals_c - vals_f)
        den = np.abs(vals_f - vals_ff)
        ratios = num / np.where(den == 0, np.inf, den)
        good = ratios[np.isfinite(ratios) & (ratios > 0)]
        if good.size:
            order = float(np.median(np.log2(good)))
    return EigenResult(extrap, vals_c, vals_f, vecs_f, fine, order)


def _discretize_coupled(vfuncs, wfunc, grid):
    r = grid.nodes()
    h = grid.h
    p = 2.0 / h**2 + vfuncs[0](r)
    q = 2.0 / h**2 + vfuncs[1](r)
    w = wfunc(r) + np.zeros_like(r)
    return p, q, w, -1.0 / h**2


def solve_coupled_fd(vfuncs, wfunc, grid: Grid, k: int, swap_channels=False):
    """k lowest states of the symmetric two-channel radial problem.

    vfuncs = (v_plus, v_minus) are the diagonal potentials, wfunc the
    off-diagonal coupling; channels are interleaved on the grid giving a
    block-tridiagonal symmetric matrix with 2x2 blocks.
    """
    order = (1, 0) if swap_channels else (0, 1)
    pair = (vfuncs[order[0]], vfuncs[order[1]])
    p, q, w, b = _discretize_coupled(pair, wfunc, grid)
    vals_c, _ = block_tridiag_eig(p, q, w, b, k)
    fine = grid.refined()
    pf, qf, wf, bf = _discretize_coupled(pair, wfunc, fine)
    vals_f, vecs_f = block_tridiag_eig(pf, qf, wf, bf, k)
    extrap = (4.0 * vals_f - vals_c) / 3.0
    return EigenResult(extrap, vals_c, vals_f, vecs_f, fine)


# ---------------------------------------------------------------------------
# Gauss-Legendre quadrature
# ---------------------------------------------------------------------------


def gauss_legendre(n: int):
    """Nodes and weights exact for polynomials up to degree 2n-1."""
    if n < 1:
        raise ValueError("need at least one node")
    nodes = np.cos(math.pi * (np.arange(1, n + 1) - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(nodes)
        p1 = nodes.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * nodes * p1 - (j - 1) * p0) / j
        if n == 1:
            p1, p0 = nodes.copy(), np.ones_like(nodes)
        dp = n * (nodes * p1 - p0) / (nodes * nodes - 1.0)
        delta = p1 / dp
        nodes -= delta
        if np.max(np.abs(delta)) < 1e-15:
            break
    p0 = np.ones_like(nodes)
    p1 = nodes.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * nodes * p1 - (j - 1) * p0) / j
    if n == 1:
        p1, p0 = nodes.copy(), np.ones_like(nodes)
    dp = n * (nodes * p1 - p0) / (nodes * nodes - 1.0)
    weights = 2.0 / ((1.0 - nodes * nodes) * dp * dp)
    idx = np.argsort(nodes)
    return nodes[idx], weights[idx]


# ---------------------------------------------------------------------------
# confluent hypergeometric function
# ---------------------------------------------------------------------------


def _as_exact(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return None


def kummer_1f1(a, b, z):
    """1F1(a; b; z).

    Negative-integer a gives the exact finite polynomial (Fractions in,
    Fraction out).  Otherwise a compensated power series; for negative z the
    Kummer transformation 1F1(a;b;z) = e^z 1F1(b-a;b;-z) keeps all series
    terms positive.  Relative accuracy ~1e-12 for |z| <= 50.
    """
    bb = _as_exact(b)
    if bb is not None and bb.denominator == 1 and bb <= 0:
        raise ValueError("1F1 pole: b is a non-positive integer")
    if isinstance(b, float) and b <= 0 and float(b).is_integer():
        raise ValueError("1F1 pole: b is a non-positive integer")

    aa = _as_exact(a)
    a_is_poly = (aa is not None and aa.denominator == 1 and aa <= 0) or (
        isinstance(a, float) and a <= 0 and float(a).is_integer()
    )
    if a_is_poly:
        n = int(-a if aa is None else -aa)
        exact = (
            aa is not None
            and _as_exact(b) is not None
            and _as_exact(z) is not None
        )
        if exact:
            total = Fraction(0)
            term = Fraction(1)
            az, bz, zz = Fraction(aa), Fraction(_as_exact(b)), Fraction(_as_exact(z))
            for kk in range(n + 1):
                total += term
                term = term * (az + kk) / (bz + kk) * zz / (kk + 1)
            return total
        total = 0.0
        term = 1.0
        af, bf, zf = float(a), float(b), float(z)
        for kk in range(n + 1):
            total += term
            term = term * (af + kk) / (bf + kk) * zf / (kk + 1)
        return total

    af, bf, zf = float(a), float(b), float(z)
    if zf < 0:
        return math.exp(zf) * kummer_1f1(bf - af, bf, -zf)
    total = 1.0
    comp = 0.0
    term = 1.0
    for kk in range(100000):
        term = term * (af + kk) / (bf + kk) * zf / (kk + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-17 * max(1.0, abs(total)):
            break
    else:
        raise ArithmeticError("1F1 series did not converge")
    return total
