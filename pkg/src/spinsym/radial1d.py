"""Radial reductions, SUSY factorization and closed-form spectra.

Sector conventions.  Expanding in the mixed eigenbasis of Q1 (eigenvalue
q = eps*mu, mu = sqrt((j+1/2)^2 + lam^2)) the h1 eigenproblem decouples into

    -u'' + (nu(nu+1) - lam^2)/r^2 u + phi(r) u = Ehat u,   nu = -q,

and for h3 the barrier becomes nu(nu+1)/r^2 with the same label.  The
closed-form Coulomb spectra are Ehat = -alpha^2/(4 N^2); the certified
principal quantum number is N = n + s with s the positive indicial exponent
s(s-1) = barrier coefficient (for h3 this is n + |nu| + (eps+1)/2 verbatim).
The printed alternative sqrt(nu(nu+1)-lam^2) + n + 1/2 is kept alongside and
adjudicated against the finite-difference oracle by certify_h1_quantization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .symkernel import GQ, I, MatrixExpr, ScalarExpr
from .numerics import Grid, default_box, kummer_1f1, solve_radial_fd, solve_coupled_fd

_ZERO = ScalarExpr.zero()


class RadialError(ValueError):
    pass


# ---------------------------------------------------------------------------
# one-dimensional operator algebra with 2x2 channel structure
# ---------------------------------------------------------------------------


def _mat_derive_r(m: MatrixExpr) -> MatrixExpr:
    return MatrixExpr(tuple(c.derive_r() for c in m.comps))


def _to_mat(value):
    if isinstance(value, MatrixExpr):
        return value
    if isinstance(value, ScalarExpr):
        return MatrixExpr.scalar(value)
    return MatrixExpr.scalar(ScalarExpr.const(value))


class Radial1DOp:
    """Normal-ordered 1d operator: sum_k M_k(r) d^k/dr^k, M_k 2x2."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms or {}

    @staticmethod
    def mult(coeff):
        m = _to_mat(coeff)
        return Radial1DOp({0: m} if not m.is_zero else {})

    @staticmethod
    def d(order=1):
        return Radial1DOp({order: MatrixExpr.scalar(ScalarExpr.const(1))})

    @property
    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        other = _to_1d(other)
        out = dict(self.terms)
        for k, m in other.terms.items():
            s = m if k not in out else out[k] + m
            if s.is_zero:
                out.pop(k, None)
            else:
                out[k] = s
        return Radial1DOp(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_to_1d(other))

    def __neg__(self):
        return Radial1DOp({k: -m for k, m in self.terms.items()})

    def scale(self, factor):
        out = {}
        for k, m in self.terms.items():
            sm = m.scale(factor)
            if not sm.is_zero:
                out[k] = sm
        return Radial1DOp(out)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GQ)):
            return self.scale(other)
        other = _to_1d(other)
        out = {}
        for k, ma in self.terms.items():
            for l, mb in other.terms.items():
                derivs = [mb]
                for t in range(1, k + 1):
                    derivs.append(_mat_derive_r(derivs[-1]))
                for t in range(k + 1):
                    coeff = ma * derivs[t]
                    if coeff.is_zero:
                        continue
                    c = math.comb(k, t)
                    if c != 1:
                        coeff = coeff.scale(c)
                    key = k - t + l
                    acc = out.get(key)
                    s = coeff if acc is None else acc + coeff
                    if s.is_zero:
                        out.pop(key, None)
                    else:
                        out[key] = s
        return Radial1DOp(out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GQ)):
            return self.scale(other)
        return _to_1d(other) * self

    def commutator(self, other):
        other = _to_1d(other)
        return self * other - other * self

    def anticommutator(self, other):
        other = _to_1d(other)
        return self * other + other * self

    def subs_params(self, values):
        out = {}
        for k, m in self.terms.items():
            sm = m.subs_params(values)
            if not sm.is_zero:
                out[k] = sm
        return Radial1DOp(out)

    def to_text(self):
        if not self.terms:
            return "0"
        return "  +  ".join(
            "(%s) d^%d" % (self.terms[k].to_text(), k) for k in sorted(self.terms)
        )

    def __repr__(self):
        return "Radial1DOp(%s)" % self.to_text()


def _to_1d(v):
    if isinstance(v, Radial1DOp):
        return v
    if isinstance(v, (int, Fraction, GQ, ScalarExpr, MatrixExpr)):
        return Radial1DOp.mult(v)
    raise TypeError("cannot interpret %r as Radial1DOp" % (v,))


def mat2(entries):
    """2x2 matrix [[p, q], [r, s]] of scalars -> sigma-basis MatrixExpr."""
    p, q = entries[0]
    r, s = entries[1]
    p, q, r, s = (_to_scalar_entry(v) for v in (p, q, r, s))
    half = Fraction(1, 2)
    c0 = (p + s) * half
    c3 = (p - s) * half
    c1 = (q + r) * half
    c2 = (r - q) * GQ(0, half)  # (r - q)/(2i) * i^2 ... = -i (r-q)/2
    return MatrixExpr((c0, c1, c2, c3))


def _to_scalar_entry(v):
    if isinstance(v, ScalarExpr):
        return v
    return ScalarExpr.const(v)


# ---------------------------------------------------------------------------
# sectors and radial problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectorData:
    """Quantum numbers of one radial channel for h1/h3 reductions."""

    j: Fraction
    eps: int                    # sign of nu
    lam: float

    @property
    def a(self):
        return float(self.j) + 0.5

    @property
    def mu(self):
        return math.sqrt(self.a**2 + self.lam**2)

    @property
    def nu(self):
        return self.eps * self.mu


@dataclass
class RadialProblem:
    """One- or two-channel radial eigenvalue problem.

    potentials are radial ScalarExprs that may contain symbolic parameters;
    param_values binds every parameter to a float for numeric work.
    boundary_exponents are the positive indicial roots per channel.
    """

    channels: int
    potentials: tuple
    param_values: dict
    coupling: object = None
    sector: dict = field(default_factory=dict)
    boundary_exponents: tuple = ()
    energy_shift: float = 0.0

    def potential_callable(self, i=0):
        expr = self.potentials[i]
        values = self.param_values

        def v(r):
            r = np.asarray(r, dtype=float)
            out = np.zeros_like(r)
            for (xe, rp, jets, params), coeff in expr.terms.items():
                if xe != (0, 0, 0) or jets:
                    raise RadialError("potential is not closed-form radial")
                c = complex(coeff.to_complex())
                for pid, power in params:
                    c *= values[pid] ** power
                out = out + c.real * r**rp
            return out

        return v

    def coupling_callable(self):
        if self.coupling is None:
            raise RadialError("not a coupled problem")
        saved = self.potentials
        try:
            self.potentials = (self.coupling,)
            return self.potential_callable(0)
        finally:
            self.potentials = saved


FALL_TO_CENTER_DELTA = 1e-6


def reduce(spec, sector: SectorData, delta=FALL_TO_CENTER_DELTA) -> RadialProblem:
    """Radial reduction of a catalog model in one (j, eps) sector.

    h1/h3 give one channel with barrier nu(nu+1) - lam^2 resp. nu(nu+1);
    h2 gives the coupled two-channel system in the sigma.L+1 eigenbasis.
    """
    from . import models as M

    model = spec.model
    if model in ("h1", "h3"):
        lam = sector.lam
        nu = sector.nu
        barrier = nu * (nu + 1) - lam**2
        if model == "h3":
            barrier += lam**2
        if barrier < -0.25 + delta:
            raise RadialError(
                "fall to the center: barrier %.6f below -1/4 + delta" % barrier
            )
        pot = ScalarExpr.param("barrier") * ScalarExpr.r(-2)
        values = {"barrier": barrier}
        if model == "h3":
            alpha = _numeric_param(spec.alpha, "alpha")
            pot = pot - ScalarExpr.param("alpha") * ScalarExpr.r(-1)
            values["alpha"] = alpha
        else:
            if spec.phi is None:
                raise RadialError("h1 reduction needs a bound phi(r)")
            pot = pot + spec.phi_expr()
            values.update(_param_defaults(spec))
        s = 0.5 + math.sqrt(0.25 + barrier)
        return RadialProblem(
            channels=1,
            potentials=(pot,),
            param_values=values,
            sector={"model": model, "j": str(sector.j), "eps": sector.eps,
                    "nu": nu, "lam": sector.lam},
            boundary_exponents=(s,),
        )

    if model == "h2":
        if spec.f is None:
            raise RadialError("h2 reduction needs a bound f(r)")
        f = spec.f_expr()
        alpha = _numeric_param(spec.alpha, "alpha")
        mu = Fraction(sector.j) + Fraction(1, 2)
        fprime = f.derive_r()
        base = f * f - ScalarExpr.param("alpha") * ScalarExpr.r(-1)
        vplus = ScalarExpr.const(mu * (mu - 1)) * ScalarExpr.r(-2) + base
        vminus = ScalarExpr.const(mu * (mu + 1)) * ScalarExpr.r(-2) + base
        values = {"alpha": alpha}
        values.update(_param_defaults(spec))
        splus = 0.5 + math.sqrt(0.25 + float(mu * (mu - 1)))
        sminus = 0.5 + math.sqrt(0.25 + float(mu * (mu + 1)))
        return RadialProblem(
            channels=2,
            potentials=(vplus, vminus),
            param_values=values,
            coupling=fprime,
            sector={"model": "h2", "j": str(sector.j), "mu": float(mu)},
            boundary_exponents=(splus, sminus),
        )

    raise RadialError("no radial reduction for model %r" % (model,))


def _numeric_param(value, name):
    if value is None:
        raise RadialError("parameter %s must be numeric for radial work" % name)
    if isinstance(value, ScalarExpr):
        raise RadialError("parameter %s must be numeric for radial work" % name)
    return float(value)


def _param_defaults(spec):
    out = {}
    if spec.lam is not None and not isinstance(spec.lam, ScalarExpr):
        out["lam"] = float(spec.lam)
    if spec.alpha is not None and not isinstance(spec.alpha, ScalarExpr):
        out["alpha"] = float(spec.alpha)
    return out


# ---------------------------------------------------------------------------
# SUSY factorization (certified forms; printed variants kept for reference)
# ---------------------------------------------------------------------------


@dataclass
class Factorization:
    s: object                   # principal exponent N0 = |nu| + (eps+1)/2
    lowering: Radial1DOp        # a = d/dr + W
    raising: Radial1DOp         # a+ = -d/dr + W
    ground_energy: ScalarExpr   # c = -alpha^2/(4 s^2)
    superpotential: ScalarExpr


def coulomb_hamiltonian(s_expr, alpha_expr) -> Radial1DOp:
    """H(s) = -d^2 + s(s-1)/r^2 - alpha/r as a symbolic 1d operator."""
    barrier = s_expr * s_expr - s_expr
    return (
        -Radial1DOp.d(2)
        + Radial1DOp.mult(barrier * ScalarExpr.r(-2))
        - Radial1DOp.mult(alpha_expr * ScalarExpr.r(-1))
    )


def factorize(nu, alpha=None, eps=None) -> Factorization:
    """Certified shape-invariant factorization of the h3 radial operator.

    s = |nu| + (eps+1)/2, W = alpha/(2s) - s/r, c = -alpha^2/(4 s^2), and
    H(s) = a+ a + c holds as an operator identity.  The printed W and c
    (alpha/s - s/(2r) and -alpha^2/s^2) fail that identity; see the
    conformance notes.  nu must be rational for the exact algebra; call with
    alpha=None to keep alpha symbolic.
    """
    if nu == 0:
        raise RadialError("factorization needs nu != 0")
    if eps is None:
        eps = 1 if nu > 0 else -1
    s_val = Fraction(abs(Fraction(nu))) + (1 if eps > 0 else 0)
    s_expr = ScalarExpr.const(s_val)
    alpha_expr = ScalarExpr.param("alpha") if alpha is None else ScalarExpr.const(alpha)
    w = alpha_expr * Fraction(1, 2 * s_val) - s_expr * ScalarExpr.r(-1)
    a_low = Radial1DOp.d(1) + Radial1DOp.mult(w)
    a_raise = -Radial1DOp.d(1) + Radial1DOp.mult(w)
    c = -(alpha_expr * alpha_expr) * Fraction(1, 4 * s_val * s_val)
    return Factorization(s_val, a_low, a_raise, c, w)


def factorization_residual(fact: Factorization, alpha_expr=None) -> Radial1DOp:
    """a+ a + c - H(s); identically zero for the certified factorization."""
    alpha_expr = alpha_expr or ScalarExpr.param("alpha")
    h = coulomb_hamiltonian(ScalarExpr.const(fact.s), alpha_expr)
    return fact.raising * fact.lowering + Radial1DOp.mult(fact.ground_energy) - h


def _cleared_ladder(s_expr, alpha_expr):
    """2s a(s) and 2s a+(s): denominator-free ladder operators."""
    w2s = alpha_expr - s_expr * s_expr * ScalarExpr.r(-1) * 2
    low = Radial1DOp.d(1).scale(s_expr * 2) + Radial1DOp.mult(w2s)
    high = -Radial1DOp.d(1).scale(s_expr * 2) + Radial1DOp.mult(w2s)
    return low, high


def factorization_identity_symbolic() -> Radial1DOp:
    """(2s a+)(2s a) + 4 s^2 c - 4 s^2 H(s) with symbolic s, alpha.

    4 s^2 c = -alpha^2, so the identity is polynomial in both parameters;
    it must vanish identically.
    """
    s = ScalarExpr.param("s")
    alpha = ScalarExpr.param("alpha")
    low, high = _cleared_ladder(s, alpha)
    h = coulomb_hamiltonian(s, alpha)
    s2 = s * s
    return high * low - Radial1DOp.mult(alpha * alpha) - h.scale(s2 * 4)


def intertwining_residual_symbolic() -> Radial1DOp:
    """H(s) (2s a+) - (2s a+) H(s+1) with symbolic s, alpha.

    The intertwining holds for the plain Hamiltonians; the printed hatted
    version H - c picks up a (c(s+1) - c(s)) a+ defect.
    """
    s = ScalarExpr.param("s")
    alpha = ScalarExpr.param("alpha")
    _, high = _cleared_ladder(s, alpha)
    h_s = coulomb_hamiltonian(s, alpha)
    h_s1 = coulomb_hamiltonian(s + 1, alpha)
    return h_s * high - high * h_s1


def shape_invariance_residual_symbolic() -> Radial1DOp:
    """Cleared partner identity, polynomial in s and alpha.

    (s+1)^2 (2s a(s))(2s a+(s)) - s^2 (2(s+1) a+(s+1))(2(s+1) a(s+1))
        = alpha^2 (2s+1),
    which encodes a(s) a+(s) = a+(s+1) a(s+1) + c(s+1) - c(s).
    """
    s = ScalarExpr.param("s")
    alpha = ScalarExpr.param("alpha")
    low_s, high_s = _cleared_ladder(s, alpha)
    low_s1, high_s1 = _cleared_ladder(s + 1, alpha)
    s2 = s * s
    s1sq = (s + 1) * (s + 1)
    lhs = (low_s * high_s).scale(s1sq) - (high_s1 * low_s1).scale(s2)
    rhs = Radial1DOp.mult(alpha * alpha * (s * 2 + 1))
    return lhs - rhs


def printed_factorization_residual() -> Radial1DOp:
    """Residual of the printed W, c (negative control for the conformance note)."""
    s = ScalarExpr.param("s")
    alpha = ScalarExpr.param("alpha")
    # printed: W = alpha/s - s/(2r), c = -alpha^2/s^2; cleared by s^2:
    # (s a+)(s a) + s^2 c - s^2 H with s a = s d + alpha - s^2/(2r)
    w_s = alpha - s * s * ScalarExpr.r(-1) * Fraction(1, 2)
    low = Radial1DOp.d(1).scale(s) + Radial1DOp.mult(w_s)
    high = -Radial1DOp.d(1).scale(s) + Radial1DOp.mult(w_s)
    h = coulomb_hamiltonian(s, alpha)
    return high * low - Radial1DOp.mult(alpha * alpha) - h.scale(s * s)


# ---------------------------------------------------------------------------
# closed-form spectra
# ---------------------------------------------------------------------------


@dataclass
class SpectrumRow:
    model: str
    j: str
    kappa: str
    eps: int
    n: int
    bigN: float
    ehat: float
    e_over_m: float
    degeneracy: int
    source: str

    def as_list(self):
        return [
            self.model, self.j, self.kappa, self.eps, self.n,
            self.bigN, self.ehat, self.e_over_m, self.degeneracy, self.source,
        ]


CSV_HEADER = [
    "model", "j", "kappa", "branch", "n", "N",
    "Ehat", "E_over_m", "degeneracy", "source",
]


@dataclass
class SpectrumTable:
    rows: list = field(default_factory=list)

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: (r.ehat, r.eps, r.n))

    def to_csv(self):
        lines = [",".join(CSV_HEADER)]
        for row in self.sorted_rows():
            lines.append(",".join(_csv_cell(v) for v in row.as_list()))
        return "\n".join(lines) + "\n"

    def to_json_rows(self):
        return [
            dict(zip(CSV_HEADER, row.as_list())) for row in self.sorted_rows()
        ]


def _csv_cell(v):
    if isinstance(v, float):
        return "%.12g" % v
    return str(v)


def principal_number(model, sector: SectorData, n):
    """Certified N: n plus the positive indicial exponent of the barrier."""
    nu = sector.nu
    lam = sector.lam
    barrier = nu * (nu + 1) - lam**2
    if model == "h3":
        barrier += lam**2
    under = 0.25 + barrier
    if under < 0:
        raise RadialError("fall to the center; no discrete spectrum")
    return n + 0.5 + math.sqrt(under)


def principal_number_printed(model, sector: SectorData, n):
    """The printed alternative sqrt(nu(nu+1) - lam^2) + n + 1/2 (h1 only)."""
    nu = sector.nu
    lam = sector.lam
    barrier = nu * (nu + 1) - lam**2
    if model == "h3":
        barrier += lam**2
    if barrier < 0:
        raise RadialError("printed formula undefined: negative radicand")
    return n + 0.5 + math.sqrt(barrier)


def exact_spectrum(model, lam, alpha, j, nmax, m_mass=1.0) -> SpectrumTable:
    """Closed-form bound states of h1 (phi = -alpha/x) or h3 in sector j.

    Emits both eps branches for n = 0..nmax with the (2j+1)-fold kappa
    degeneracy; Ehat = -alpha^2/(4 N^2), E = Ehat/(2m).
    """
    if model not in ("h1", "h3"):
        raise RadialError("closed-form spectra exist for h1/h3 only")
    alpha = float(alpha)
    if alpha <= 0:
        raise RadialError("bound states need alpha > 0")
    j = Fraction(j)
    table = SpectrumTable()
    deg = int(2 * j + 1)
    for eps in (-1, +1):
        sector = SectorData(j, eps, float(lam))
        for n in range(nmax + 1):
            big_n = principal_number(model, sector, n)
            ehat = -(alpha**2) / (4.0 * big_n**2)
            table.rows.append(
                SpectrumRow(
                    model=model, j=str(j), kappa="*", eps=eps, n=n,
                    bigN=big_n, ehat=ehat, e_over_m=ehat / (2.0 * m_mass**2),
                    degeneracy=deg, source="closed-form",
                )
            )
    return table


def ehat_to_e(ehat, m_mass=1.0):
    """Unit conversion Ehat = 2 m E."""
    return ehat / (2.0 * m_mass)


def energy_convention_residual() -> ScalarExpr:
    """Symbolic check of E = -m alpha_phys^2 / (2 N^2).

    With the rescaled alpha = 2 m alpha_phys, Ehat = -alpha^2/(4 N^2) and
    E = Ehat/(2m) reproduce the printed physical energy exactly.
    """
    m = ScalarExpr.param("m")
    aph = ScalarExpr.param("aph")
    n_inv2 = ScalarExpr.param("NN", -2)
    alpha = m * aph * 2
    ehat = -(alpha * alpha) * n_inv2 * Fraction(1, 4)
    e = ehat * ScalarExpr.param("m", -1) * Fraction(1, 2)
    printed = -(m * aph * aph) * n_inv2 * Fraction(1, 2)
    return e - printed


# ---------------------------------------------------------------------------
# closed-form wavefunctions
# ---------------------------------------------------------------------------


class RadialWavefunction:
    """u(r) = C r^s exp(-kappa r) 1F1(-n, 2s, 2 kappa r) with polynomial 1F1.

    Carries analytic first and second derivatives, so ODE residuals can be
    evaluated to machine precision.
    """

    def __init__(self, s, kappa, n, norm=1.0):
        self.s = float(s)
        self.kappa = float(kappa)
        self.n = int(n)
        # expand C r^s e^{-kr} sum_t c_t (2k r)^t into e^{-kr} sum c~_t r^{s+t}
        coeffs = []
        term = 1.0
        for t in range(self.n + 1):
            coeffs.append(term * (2.0 * self.kappa) ** t)
            term = term * (-self.n + t) / ((2.0 * self.s + t) * (t + 1.0))
        self.poly = [norm * c for c in coeffs]

    def _sum(self, r, shift):
        out = np.zeros_like(r)
        for t, c in enumerate(self.poly):
            p = self.s + t + shift
            out = out + c * _safe_pow(r, p)
        return out

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-self.kappa * r) * self._sum(r, 0)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        poly_part = np.zeros_like(r)
        for t, c in enumerate(self.poly):
            p = self.s + t
            poly_part = poly_part + c * p * _safe_pow(r, p - 1)
        return np.exp(-self.kappa * r) * (poly_part - self.kappa * self._sum(r, 0))

    def second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        d2 = np.zeros_like(r)
        d1 = np.zeros_like(r)
        for t, c in enumerate(self.poly):
            p = self.s + t
            d2 = d2 + c * p * (p - 1) * _safe_pow(r, p - 2)
            d1 = d1 + c * p * _safe_pow(r, p - 1)
        k = self.kappa
        return np.exp(-k * r) * (d2 - 2 * k * d1 + k * k * self._sum(r, 0))

    def node_count(self, rmax, samples=20000):
        r = np.linspace(1e-6, rmax, samples)
        vals = self(r)
        signs = np.sign(vals)
        signs = signs[signs != 0]
        return int(np.sum(signs[1:] != signs[:-1]))


def _safe_pow(r, p):
    if p == 0:
        return np.ones_like(r)
    return np.power(r, p)


def wavefunction(model, lam, alpha, j, eps, n) -> RadialWavefunction:
    """Bound-state radial function for h1 (phi = -alpha/x) or h3.

    Uses the decaying exponential branch; the polynomial part is the finite
    Kummer series 1F1(-n, 2s, 2 kappa r).
    """
    sector = SectorData(Fraction(j), eps, float(lam))
    big_n = principal_number(model, sector, n)
    kappa = float(alpha) / (2.0 * big_n)
    s = big_n - n
    return RadialWavefunction(s, kappa, n)


def ode_residual(problem: RadialProblem, u: RadialWavefunction, ehat,
                 r=None) -> float:
    """Relative grid residual of -u'' + V u - Ehat u for a 1-channel problem."""
    if problem.channels != 1:
        raise RadialError("ode_residual handles single channels")
    if r is None:
        r = np.linspace(0.05, 30.0, 4000)
    v = problem.potential_callable(0)(r)
    num = -u.second_derivative(r) + (v - ehat) * u(r)
    scale = np.abs(u.second_derivative(r)) + np.abs(v * u(r)) + abs(ehat) * np.abs(u(r))
    scale = np.maximum(scale, np.max(np.abs(u(r))) * max(abs(ehat), 1.0))
    return float(np.max(np.abs(num) / scale))


# ---------------------------------------------------------------------------
# h2 coupled system: decoupling and the matrix superpotential
# ---------------------------------------------------------------------------


@dataclass
class DecoupledOperator:
    """Second-order non-symmetric operator from the Q2-eigenvalue reduction.

    Acts on the l = j+1/2 channel; psi_plus is reconstructed as
    a_mu psi_minus / (f + qtilde).
    """

    mu: float
    alpha: float
    qtilde: float
    f: object              # callable f(r)
    fprime: object         # callable f'(r)

    def coeffs(self, r):
        r = np.asarray(r, dtype=float)
        mu, al, qt = self.mu, self.alpha, self.qtilde
        f = self.f(r)
        fp = self.fprime(r)
        w = mu / r - al / (2.0 * mu)
        c1 = fp / (f + qt)
        # a+ a = -d^2 + w^2 - w' with -w' = mu/r^2
        c0 = w * w + mu / r**2 + c1 * w + f * f - al**2 / (4.0 * mu**2)
        return c1, c0

    def apply(self, r, u, du, d2u):
        c1, c0 = self.coeffs(r)
        return -d2u + c1 * du + c0 * u


def decouple_h2(lam, alpha, j, qtilde) -> DecoupledOperator:
    """Decoupled operator for f = lam/x at Q2 branch qtilde.

    Raises on the singular branch f + qtilde == 0 (possible only when
    qtilde < 0 and lam > 0 meet on the grid).
    """
    mu = float(Fraction(j) + Fraction(1, 2))
    lam = float(lam)
    alpha = float(alpha)

    def f(r):
        return lam / r

    def fprime(r):
        return -lam / r**2

    if qtilde == 0 and lam == 0:
        raise RadialError("f + qtilde vanishes identically")
    return DecoupledOperator(mu, alpha, qtilde, f, fprime)


def qtilde_for(ehat, alpha, j, branch=+1):
    """qtilde = branch * sqrt(Ehat + alpha^2/(2j+1)^2)."""
    mu = float(Fraction(j) + Fraction(1, 2))
    val = ehat + alpha**2 / (4.0 * mu * mu)
    if val < -1e-12:
        raise RadialError("qtilde undefined: Ehat below the SUSY floor")
    return branch * math.sqrt(max(val, 0.0))


def h2_matrix_superpotential_residual(lam=None):
    """U - (W^2 - W') for W = (mu/x - alpha/(2 mu)) s3 + f s1, symbolically.

    mu enters as the symbolic parameter 'mu'; cleared of 1/(2 mu) by scaling
    with 2 mu.  The diagonal of U must reproduce the coupled-channel
    potentials shifted by alpha^2/(2j+1)^2 and the off-diagonal must be -f'.
    """
    mu = ScalarExpr.param("mu")
    alpha = ScalarExpr.param("alpha")
    f = ScalarExpr.jet("f", 0) if lam is None else lam * ScalarExpr.r(-1)
    # 2 mu W = (2 mu^2/x - alpha) s3 + 2 mu f s1
    w3 = mu * mu * ScalarExpr.r(-1) * 2 - alpha
    w1 = mu * f * 2
    w = MatrixExpr((_ZERO, w1, _ZERO, w3))
    w_sq = w * w
    w_prime = MatrixExpr((_ZERO, w1.derive_r(), _ZERO, w3.derive_r()))
    u_scaled = w_sq - w_prime.scale(ScalarExpr.param("mu") * 2)
    # 4 mu^2 U from the coupled channels shifted by alpha^2/(2j+1)^2:
    # diag(4 mu^2 (mu(mu+-1)/x^2 + f^2 - alpha/x) + alpha^2) - 4 mu^2 f' s1
    mu2 = mu * mu
    base = f * f - alpha * ScalarExpr.r(-1)
    barrier_plus = (mu * mu + mu) * ScalarExpr.r(-2)    # l = j+1/2 channel (s3 = +1)
    barrier_minus = (mu * mu - mu) * ScalarExpr.r(-2)   # l = j-1/2 channel (s3 = -1)
    diag_p = (barrier_plus + base) * (mu2 * 4) + alpha * alpha
    diag_m = (barrier_minus + base) * (mu2 * 4) + alpha * alpha
    off = -(f.derive_r()) * (mu2 * 4)
    u_target = mat2(((diag_p, off), (off, diag_m)))
    return u_scaled - u_target


def h2_zero_mode(lam, alpha, j, r):
    """Ground state of the coupled h2 system from (d/dr + W) psi = 0.

    Integrates the first-order system outward (RK4) from the regular branch
    psi ~ r^s v with s = sqrt(mu^2 + lam^2) and (mu s3 + lam s1) v = -s ... v
    chosen as the decaying-at-zero eigenvector.  The state has
    Ehat = -alpha^2/(2j+1)^2 (qtilde = 0).
    """
    mu = float(Fraction(j) + Fraction(1, 2))
    lam = float(lam)
    alpha = float(alpha)
    s = math.sqrt(mu * mu + lam * lam)

    def wmat(rr):
        d = mu / rr - alpha / (2.0 * mu)
        return np.array([[d, lam / rr], [lam / rr, -d]])

    # regular branch: psi' = -(M/r + const) psi, M v = -s v ... wait:
    # psi = r^s v0 + ... with (mu s3 + lam s1) v0 = -s v0 gives psi' = -W psi.
    mmat = np.array([[mu, lam], [lam, -mu]])
    evals, evecs = np.linalg.eigh(mmat)
    v0 = evecs[:, 0] if abs(evals[0] + s) < abs(evals[1] + s) else evecs[:, 1]

    r = np.asarray(r, dtype=float)
    psi = np.zeros((r.size, 2))
    r0 = r[0]
    y = (r0**s) * v0
    psi[0] = y
    for i in range(r.size - 1):
        h = r[i + 1] - r[i]

        def rhs(rr, yy):
            return -wmat(rr) @ yy

        k1 = rhs(r[i], y)
        k2 = rhs(r[i] + h / 2, y + h / 2 * k1)
        k3 = rhs(r[i] + h / 2, y + h / 2 * k2)
        k4 = rhs(r[i] + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        psi[i + 1] = y
    norm = np.max(np.abs(psi))
    return psi / (norm if norm else 1.0)


# ---------------------------------------------------------------------------
# sector superalgebra of Q3, Q4 = (i/2)[Q1, Q3]
# ---------------------------------------------------------------------------


@dataclass
class SuperalgebraReport:
    checks: list = field(default_factory=list)   # (name, zero, nterms)

    @property
    def passed(self):
        return all(z for _, z, _ in self.checks)


def _sector_frame(j, lam):
    """Exact sector data: requires mu = sqrt(a^2 + lam^2) rational."""
    a = Fraction(j) + Fraction(1, 2)
    lam = Fraction(lam)
    mu2 = a * a + lam * lam
    mu = _fraction_sqrt(mu2)
    if mu is None:
        raise RadialError(
            "sector superalgebra needs rational mu; got mu^2 = %s" % mu2
        )
    return a, lam, mu


def _fraction_sqrt(q):
    num = int(math.isqrt(q.numerator))
    den = int(math.isqrt(q.denominator))
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


def superalgebra_check(j, lam, alpha=None, perturb_lam=False) -> SuperalgebraReport:
    """Verify the rescaled sector superalgebra of h3 in a fixed (j, lam) sector.

    With Q3hat = Q3/(j+1/2) and Q4hat = (i/2)[Q1, Q3]/((j+1/2) mu) the exact
    relations are

        {Q3hat, Q3hat} = 2 (H3 + alpha^2/(2j+1)^2)
        {Q4hat, Q4hat} = 2 (H3 + alpha^2/(4 mu^2))
        {Q3hat, Q4hat} = 0

    identically in symbolic alpha.  The printed rescaling (extra term
    alpha Q1/((2j+1) nu)) leaves constant residuals in both Q4 relations and
    is recorded as a negative control.  mu = sqrt((j+1/2)^2 + lam^2) must be
    rational for the exact algebra.
    """
    a, lam_f, mu = _sector_frame(j, lam)
    lam_used = lam_f + 1 if perturb_lam else lam_f
    alpha_expr = ScalarExpr.param("alpha") if alpha is None else ScalarExpr.const(alpha)

    # blocks in the (Omega+, Omega-) basis, then conjugated to the Q1 basis
    # with the unnormalized eigenvector matrix S = [[mu+a, -lam], [lam, mu+a]]
    s_det = (mu + a) * (mu + a) + lam_f * lam_f
    s_mat = ((mu + a, -lam_f), (lam_f, mu + a))
    s_inv = tuple(
        tuple(Fraction(v, 1) / s_det for v in row)
        for row in ((mu + a, lam_f), (-lam_f, mu + a))
    )

    def conj(block):
        return _rat_mat_mul(_rat_mat_mul(s_inv, block), s_mat)

    a_block = conj(((a, 0), (0, -a)))
    b_block = conj(((0, 1), (1, 0)))
    q1_block = _rat_add(a_block, _rat_scale(b_block, lam_used))

    a_mat = mat2(tuple(tuple(ScalarExpr.const(v) for v in row) for row in a_block))
    b_mat = mat2(tuple(tuple(ScalarExpr.const(v) for v in row) for row in b_block))
    ident = MatrixExpr.scalar(ScalarExpr.const(1))

    rinv = Radial1DOp.mult(ScalarExpr.r(-1))
    # i sigma.p on u(r): [B] d/dr - (1/r) [B][A]
    isp = Radial1DOp({1: b_mat}) - rinv * Radial1DOp.mult(b_mat * a_mat)
    f_op = Radial1DOp.mult(ScalarExpr.const(lam_used) * ScalarExpr.r(-1))
    a_op = Radial1DOp.mult(a_mat)
    b_op = Radial1DOp.mult(b_mat)
    q3 = (isp + f_op) * a_op + b_op.scale(alpha_expr * Fraction(1, 2))
    q3_hat = q3.scale(Fraction(1, 1) / a)

    q1_op = Radial1DOp.mult(a_mat + b_mat.scale(ScalarExpr.const(lam_used)))
    q4 = (q1_op * q3 - q3 * q1_op).scale(GQ(0, Fraction(1, 2)))
    q4_hat = q4.scale(Fraction(1, 1) / (a * mu))

    barrier = mat2(((ScalarExpr.const(mu * (mu - 1)), ScalarExpr.zero()),
                    (ScalarExpr.zero(), ScalarExpr.const(mu * (mu + 1)))))

    def h3_plus(const):
        return (
            -Radial1DOp.d(2)
            + Radial1DOp.mult(barrier).scale(ScalarExpr.r(-2))
            - Radial1DOp.mult(ident).scale(alpha_expr * ScalarExpr.r(-1))
            + Radial1DOp.mult(ident).scale(alpha_expr * alpha_expr * const)
        )

    rep = SuperalgebraReport()

    def record(name, op):
        rep.checks.append((name, op.is_zero, len(op.terms)))

    if not perturb_lam:
        diag_target = mat2(((ScalarExpr.const(mu), ScalarExpr.zero()),
                            (ScalarExpr.zero(), ScalarExpr.const(-mu))))
        q1_sector = mat2(tuple(tuple(ScalarExpr.const(v) for v in row)
                               for row in q1_block))
        record("Q1 sector block is diag(mu, -mu)",
               Radial1DOp.mult(q1_sector) - Radial1DOp.mult(diag_target))
    record("{Q3hat, Q3hat} = 2 (H3 + alpha^2/(2j+1)^2)",
           q3_hat.anticommutator(q3_hat) - h3_plus(Fraction(1, 4) / (a * a)).scale(2))
    record("{Q4hat, Q4hat} = 2 (H3 + alpha^2/(4 mu^2))",
           q4_hat.anticommutator(q4_hat) - h3_plus(Fraction(1, 4) / (mu * mu)).scale(2))
    record("{Q3hat, Q4hat} = 0", q3_hat.anticommutator(q4_hat))
    return rep


def printed_superalgebra_residuals(j, lam):
    """Residuals of the printed rescaled-Q4 relations (negative control).

    Returns (q4_square_residual, cross_residual) as constants-carrying 1d
    operators; the printed alpha Q1/((2j+1) nu) correction fails to close the
    algebra by explicit alpha^2 constants.
    """
    a, lam_f, mu = _sector_frame(j, lam)
    alpha_expr = ScalarExpr.param("alpha")
    s_det = (mu + a) * (mu + a) + lam_f * lam_f
    s_mat = ((mu + a, -lam_f), (lam_f, mu + a))
    s_inv = tuple(
        tuple(Fraction(v, 1) / s_det for v in row)
        for row in ((mu + a, lam_f), (-lam_f, mu + a))
    )

    def conj(block):
        return _rat_mat_mul(_rat_mat_mul(s_inv, block), s_mat)

    a_mat = mat2(tuple(tuple(ScalarExpr.const(v) for v in row)
                       for row in conj(((a, 0), (0, -a)))))
    b_mat = mat2(tuple(tuple(ScalarExpr.const(v) for v in row)
                       for row in conj(((0, 1), (1, 0)))))
    ident = MatrixExpr.scalar(ScalarExpr.const(1))
    rinv = Radial1DOp.mult(ScalarExpr.r(-1))
    isp = Radial1DOp({1: b_mat}) - rinv * Radial1DOp.mult(b_mat * a_mat)
    f_op = Radial1DOp.mult(ScalarExpr.const(lam_f) * ScalarExpr.r(-1))
    q3 = (isp + f_op) * Radial1DOp.mult(a_mat) + Radial1DOp.mult(b_mat).scale(
        alpha_expr * Fraction(1, 2)
    )
    q3_hat = q3.scale(Fraction(1, 1) / a)
    q1_op = Radial1DOp.mult(a_mat + b_mat.scale(ScalarExpr.const(lam_f)))
    q4 = (q1_op * q3 - q3 * q1_op).scale(GQ(0, Fraction(1, 2)))
    q4_printed = q4.scale(Fraction(1, 1) / mu) + q1_op.scale(
        Fraction(1, 1) / (2 * a * mu)
    ).scale(alpha_expr)
    barrier = mat2(((ScalarExpr.const(mu * (mu - 1)), ScalarExpr.zero()),
                    (ScalarExpr.zero(), ScalarExpr.const(mu * (mu + 1)))))
    h_hat = (
        -Radial1DOp.d(2)
        + Radial1DOp.mult(barrier).scale(ScalarExpr.r(-2))
        - Radial1DOp.mult(ident).scale(alpha_expr * ScalarExpr.r(-1))
        + Radial1DOp.mult(ident).scale(alpha_expr * alpha_expr * (Fraction(1, 4) / (a * a)))
    )
    return (
        q4_printed.anticommutator(q4_printed) - h_hat.scale(2),
        q3_hat.anticommutator(q4_printed),
    )


def _rat_mat_mul(x, y):
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )


def _rat_add(x, y):
    return tuple(tuple(x[i][j] + y[i][j] for j in range(2)) for i in range(2))


def _rat_scale(x, c):
    return tuple(tuple(v * c for v in row) for row in x)


# ---------------------------------------------------------------------------
# oracle adjudication of the h1 principal-number formula
# ---------------------------------------------------------------------------


@dataclass
class QuantizationVerdict:
    lam: float
    j: str
    eps: int
    n: int
    ehat_numeric: float
    ehat_indicial: float
    ehat_printed: float | None

    @property
    def indicial_error(self):
        return abs(self.ehat_numeric - self.ehat_indicial) / abs(self.ehat_numeric)

    @property
    def printed_error(self):
        if self.ehat_printed is None:
            return float("inf")
        return abs(self.ehat_numeric - self.ehat_printed) / abs(self.ehat_numeric)


def certify_h1_quantization(lam, alpha, j, nmax, grid_points=2600):
    """Finite-difference adjudication of N_indicial vs N_printed for h1.

    Returns per-state verdicts; the caller decides the tolerance.  The
    h1 potential is the Coulomb choice phi = -alpha/x.
    """
    from . import models as M

    out = []
    alpha = float(alpha)
    spec = M.ModelSpec("h1", lam=Fraction(lam).limit_denominator(10**9)
                       if not isinstance(lam, float) else lam,
                       alpha=alpha, phi=None)
    for eps in (-1, +1):
        sector = SectorData(Fraction(j), eps, float(lam))
        nu = sector.nu
        barrier = nu * (nu + 1) - float(lam) ** 2
        n_ind = [principal_number("h1", sector, n) for n in range(nmax + 1)]
        try:
            n_pr = [principal_number_printed("h1", sector, n) for n in range(nmax + 1)]
        except RadialError:
            n_pr = [None] * (nmax + 1)
        weakest = -(alpha**2) / (4.0 * (n_ind[-1] + 1.0) ** 2)
        grid = Grid(default_box(weakest), grid_points)

        def vfunc(r, _b=barrier, _a=alpha):
            return _b / r**2 - _a / r

        s_low = 0.5 + math.sqrt(0.25 + barrier)
        singular = (barrier, s_low) if s_low < 1.5 else None
        res = solve_radial_fd(vfunc, grid, nmax + 1, singular_exponent=singular)
        for n in range(nmax + 1):
            ehat_ind = -(alpha**2) / (4.0 * n_ind[n] ** 2)
            ehat_pr = None if n_pr[n] is None else -(alpha**2) / (4.0 * n_pr[n] ** 2)
            out.append(
                QuantizationVerdict(
                    lam=float(lam), j=str(Fraction(j)), eps=eps, n=n,
                    ehat_numeric=float(res.values[n]),
                    ehat_indicial=ehat_ind, ehat_printed=ehat_pr,
                )
            )
    return out
