"""Spherical-spinor machinery for the (j, kappa) sectors.

The two-dimensional angular sectors are spanned by spinor spherical
harmonics Omega_plus (orbital l = j - 1/2) and Omega_minus (l = j + 1/2),
normalized so that

    (sigma.L + 1) Omega_pm = +-(j + 1/2) Omega_pm,
    sigma.n Omega_plus = Omega_minus,   sigma.n Omega_minus = Omega_plus.

Exact 2x2 blocks of sector operators use Fraction arithmetic; quadrature
verification runs on a Gauss-Legendre x uniform-phi product grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numerics import gauss_legendre


@dataclass(frozen=True)
class Sector:
    """Angular sector (j, kappa) with dipole coupling lam."""

    j: Fraction
    kappa: Fraction
    lam: object = Fraction(0)

    def __post_init__(self):
        j = Fraction(self.j)
        kappa = Fraction(self.kappa)
        if (j - Fraction(1, 2)).denominator != 1 or j < Fraction(1, 2):
            raise ValueError("j must be a half-integer >= 1/2")
        if (j - kappa).denominator != 1 or abs(kappa) > j:
            raise ValueError("kappa must run over -j..j in integer steps")

    @property
    def a(self):
        """j + 1/2, the eigenvalue scale of sigma.L + 1."""
        return Fraction(self.j) + Fraction(1, 2)


# ---------------------------------------------------------------------------
# scalar spherical harmonics
# ---------------------------------------------------------------------------


def _legendre_normalized(lmax, m, x):
    """Orthonormal associated Legendre values P~_l^m(x) for l = m..lmax.

    Condon-Shortley phase included; stable three-term recurrence, no
    factorials.  Returns array of shape (lmax - m + 1,) + x.shape.
    """
    x = np.asarray(x, dtype=float)
    sx = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    pmm = np.full_like(x, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(1, m + 1):
        pmm = -math.sqrt((2 * k + 1) / (2.0 * k)) * sx * pmm
    out = [pmm]
    if lmax > m:
        out.append(math.sqrt(2 * m + 3) * x * pmm)
    for l in range(m + 2, lmax + 1):
        c1 = math.sqrt((4 * l * l - 1) / float(l * l - m * m))
        c2 = math.sqrt(((l - 1) ** 2 - m * m) / float(4 * (l - 1) ** 2 - 1))
        out.append(c1 * (x * out[-1] - c2 * out[-2]))
    return np.stack(out)


def ylm(l, m, theta, phi):
    """Complex spherical harmonic Y_l^m on arrays theta, phi."""
    if abs(m) > l:
        return np.zeros(np.broadcast(theta, phi).shape, dtype=complex)
    am = abs(m)
    p = _legendre_normalized(l, am, np.cos(theta))[l - am]
    val = p * np.exp(1j * am * np.asarray(phi))
    if m >= 0:
        return val
    return (-1) ** am * np.conjugate(val)


# ---------------------------------------------------------------------------
# quadrature grid
# ---------------------------------------------------------------------------


class SphereGrid:
    """Gauss-Legendre x uniform-phi grid, exact for Y-products up to lmax."""

    def __init__(self, lmax, ntheta=None, nphi=None):
        self.lmax = lmax
        nt = ntheta or (2 * lmax + 2)
        np_ = nphi or (4 * lmax + 5)
        xs, ws = gauss_legendre(nt)
        self.theta = np.arccos(xs)
        self.wtheta = ws
        self.phi = 2.0 * math.pi * np.arange(np_) / np_
        self.wphi = 2.0 * math.pi / np_
        self.Theta, self.Phi = np.meshgrid(self.theta, self.phi, indexing="ij")

    def integrate(self, vals):
        return self.wphi * np.sum(self.wtheta[:, None] * vals)

    def inner(self, f, g):
        """<f, g> over the sphere; trailing axis is the spinor index if 3d."""
        prod = np.conjugate(f) * g
        if prod.ndim == 3:
            prod = prod.sum(axis=-1)
        return self.integrate(prod)

    def sigma_n(self, f):
        """Pointwise sigma.n action on a spinor field f[..., 2]."""
        ct = np.cos(self.Theta)
        st = np.sin(self.Theta)
        em = np.exp(-1j * self.Phi)
        ep = np.exp(1j * self.Phi)
        out = np.empty_like(f)
        out[..., 0] = ct * f[..., 0] + st * em * f[..., 1]
        out[..., 1] = st * ep * f[..., 0] - ct * f[..., 1]
        return out


# ---------------------------------------------------------------------------
# spinor spherical harmonics
# ---------------------------------------------------------------------------


def spinor_harmonic(sector: Sector, sign: int, grid: SphereGrid):
    """Omega_plus (sign=+1, l=j-1/2) or Omega_minus (sign=-1, l=j+1/2).

    Omega_minus carries an extra overall minus sign relative to the bare
    Clebsch-Gordan combination, which turns the usual sigma.n Omega = -Omega'
    into the clean swap sigma.n Omega_pm = Omega_mp.
    """
    j = Fraction(sector.j)
    kappa = Fraction(sector.kappa)
    out = np.zeros(grid.Theta.shape + (2,), dtype=complex)
    m_up = kappa - Fraction(1, 2)
    m_dn = kappa + Fraction(1, 2)
    if sign > 0:
        l = j - Fraction(1, 2)
        c_up = math.sqrt(float((l + kappa + Fraction(1, 2)) / (2 * l + 1)))
        c_dn = math.sqrt(float((l - kappa + Fraction(1, 2)) / (2 * l + 1)))
    else:
        l = j + Fraction(1, 2)
        c_up = math.sqrt(float((l - kappa + Fraction(1, 2)) / (2 * l + 1)))
        c_dn = -math.sqrt(float((l + kappa + Fraction(1, 2)) / (2 * l + 1)))
    li = int(l)
    if abs(m_up) <= l and m_up.denominator == 1:
        out[..., 0] = c_up * ylm(li, int(m_up), grid.Theta, grid.Phi)
    if abs(m_dn) <= l and m_dn.denominator == 1:
        out[..., 1] = c_dn * ylm(li, int(m_dn), grid.Theta, grid.Phi)
    return out


# ---------------------------------------------------------------------------
# exact sector blocks
# ---------------------------------------------------------------------------


def q1_block(sector: Sector):
    """Block of Q1 = sigma.L + 1 + lam sigma.n in the (Omega+, Omega-) basis."""
    a = sector.a
    lam = Fraction(sector.lam) if not isinstance(sector.lam, float) else sector.lam
    return ((a, lam), (lam, -a))


def q1_block_squared(sector: Sector):
    m = q1_block(sector)
    return _mat_mul(m, m)


def q1_eigenvalues(sector: Sector):
    """Eigenvalues +-mu with mu = sqrt(j(j+1) + lam^2 + 1/4)."""
    a = float(sector.a)
    lam = float(sector.lam)
    mu = math.sqrt(a * a + lam * lam)
    return mu, -mu


def _mat_mul(x, y):
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


ANGULAR_OPS = ("sigma-n", "sigma-l-plus-1", "q1", "j-squared", "sigma-p-radial")


@dataclass
class ReducedOp:
    """Exact 2x2 block, with radial factors for first-order operators."""

    op_id: str
    block: tuple
    radial_note: str = ""


def angular_reduce(op_id: str, sector: Sector) -> ReducedOp:
    a = sector.a
    if op_id == "sigma-n":
        return ReducedOp(op_id, ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))))
    if op_id == "sigma-l-plus-1":
        return ReducedOp(op_id, ((a, Fraction(0)), (Fraction(0), -a)))
    if op_id == "q1":
        return ReducedOp(op_id, q1_block(sector))
    if op_id == "j-squared":
        jj = Fraction(sector.j) * (Fraction(sector.j) + 1)
        return ReducedOp(op_id, ((jj, Fraction(0)), (Fraction(0), jj)))
    if op_id == "sigma-p-radial":
        swap = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
        swap_a = ((Fraction(0), -a), (a, Fraction(0)))
        return ReducedOp(
            op_id,
            swap,
            radial_note=(
                "i sigma.p = [sigma.n] d/dr - (1/r) [sigma.n (sigma.L+1)] on "
                "u(r) = r psi(r); blocks %s and %s" % (swap, swap_a)
            ),
        )
    raise ValueError("unsupported angular operator %r" % (op_id,))


# ---------------------------------------------------------------------------
# the lam-mixed Q1 eigenbasis
# ---------------------------------------------------------------------------


def omega_hat_coefficients(sector: Sector, eps_sign: int):
    """Mixing coefficients (c_plus, c_minus) of the Q1 eigenvector.

    eps_sign selects the Q1 eigenvalue eps*mu.  The pair is unit-norm; the
    ratio c_minus/c_plus = eps*lam/(mu + eps*a) reproduces the printed
    mixing ratios once the Clebsch-Gordan factors are pulled out.
    """
    a = float(sector.a)
    lam = float(sector.lam)
    mu = math.sqrt(a * a + lam * lam)
    if eps_sign > 0:
        c_plus = math.sqrt((mu + a) / (2 * mu))
        c_minus = lam / math.sqrt(2 * mu * (mu + a)) if lam else 0.0
    else:
        c_plus = lam / math.sqrt(2 * mu * (mu + a)) if lam else 0.0
        c_minus = -math.sqrt((mu + a) / (2 * mu))
    return c_plus, c_minus


def omega_hat(sector: Sector, eps_sign: int, grid: SphereGrid):
    """Grid values of the Q1 eigenspinor with eigenvalue eps*mu."""
    if grid.lmax < int(Fraction(sector.j) + Fraction(1, 2)):
        raise ValueError("grid degree too small for this j")
    c_plus, c_minus = omega_hat_coefficients(sector, eps_sign)
    om_p = spinor_harmonic(sector, +1, grid)
    om_m = spinor_harmonic(sector, -1, grid)
    return c_plus * om_p + c_minus * om_m


def measured_normalization(sector: Sector, grid: SphereGrid):
    """Quadrature norms of both omega-hat spinors.

    The printed closed form carries the prefactor 1/(2 sqrt(mu)); with the
    Clebsch-Gordan weights in place that prefactor is exactly what makes the
    norm one, and the measured values confirm it.
    """
    out = {}
    for eps_sign in (+1, -1):
        f = omega_hat(sector, eps_sign, grid)
        out[eps_sign] = float(abs(grid.inner(f, f)) ** 0.5)
    return out


def printed_mixing_ratio(sector: Sector, eps_sign: int):
    """Y-coefficient ratio of the printed spinor basis functions."""
    j = float(Fraction(sector.j))
    kappa = float(Fraction(sector.kappa))
    lam = float(sector.lam)
    a = j + 0.5
    mu = math.sqrt(a * a + lam * lam)
    if eps_sign > 0:
        upper = math.sqrt((mu + a) * (j + kappa) / j)
        lower = lam * math.sqrt((j - kappa + 1) / ((j + 1) * (mu + a)))
        return lower / upper if upper else float("inf")
    upper = lam * math.sqrt((j - kappa) / (j * (mu + a))) if j > 0 else 0.0
    lower = math.sqrt((j + kappa + 1) * (mu + a) / (j + 1))
    return upper / lower if lower else float("inf")
