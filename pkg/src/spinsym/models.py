"""Catalog of the rotationally invariant Hamiltonians and their integrals.

Four Hamiltonian families (h1..h4) and the integrals of motion J_a, Q1..Q5,
R_a, plus the dilation/conformal pair D, K.  Constructors return normal-form
DiffOps over the exact kernel.

Where the printed source formulas are internally inconsistent, the catalog
uses the variant certified by the commutator tests; `spinsym.conformance`
re-derives every such choice and records printed-vs-certified.  The certified
convention is a single sign flip in the h1/h3 dipole term: with

    Q1 = sigma.L + 1 + lam*sigma.n

the commuting Hamiltonian is h1 = -Lap - lam*sigma.x/x^3 + phi(x), and then
h3 = h1|_{phi = lam^2/x^2 - alpha/x} = h2|_{f = lam/x} holds verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .symkernel import GQ, I, DiffOp, MatrixExpr, ScalarExpr, eps

MODELS = ("h1", "h2", "h3", "h4")

INTEGRALS = (
    "j1", "j2", "j3",
    "q1", "q2", "q3", "q4", "q5",
    "r1", "r2", "r3",
    "d", "k",
)

# integral -> models it is an integral of motion for
COMPATIBLE = {
    "j1": MODELS, "j2": MODELS, "j3": MODELS,
    "q1": ("h1", "h3"),
    "q2": ("h2",),
    "q3": ("h3",),
    "q4": MODELS,
    "q5": ("h3",),
    "r1": ("h4",), "r2": ("h4",), "r3": ("h4",),
    "d": MODELS, "k": MODELS,
}


class ModelError(ValueError):
    pass


def _as_scalar(v, default_param):
    if v is None:
        return ScalarExpr.param(default_param)
    if isinstance(v, ScalarExpr):
        return v
    if isinstance(v, (int, Fraction, GQ)):
        return ScalarExpr.const(v)
    raise ModelError("bad parameter value %r" % (v,))


@dataclass(frozen=True)
class ModelSpec:
    """Which Hamiltonian to build and with what couplings.

    lam/alpha default to abstract symbols; phi (h1 scalar potential) and
    f (h2 radial function) default to abstract radial functions.  Energies
    are in the rescaled convention Ehat = 2mE.
    """

    model: str
    lam: object = None
    alpha: object = None
    phi: object = None          # radial ScalarExpr, or None for abstract phi(x)
    f: object = None            # radial ScalarExpr, or None for abstract f(x)
    allow_trivial_dipole: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ModelError("unknown model id %r" % (self.model,))

    def lam_expr(self):
        return _as_scalar(self.lam, "lam")

    def alpha_expr(self):
        return _as_scalar(self.alpha, "alpha")

    def phi_expr(self):
        if self.phi is None:
            return ScalarExpr.jet("phi", 0)
        return _as_scalar(self.phi, "phi")

    def f_expr(self):
        if self.f is None:
            return ScalarExpr.jet("f", 0)
        return _as_scalar(self.f, "f")


# ---------------------------------------------------------------------------
# primitive geometric operators
# ---------------------------------------------------------------------------


def x_op(a):
    return DiffOp.mult(ScalarExpr.x(a))

def p_op(a):
    return DiffOp.momentum(a)

def laplacian():
    return DiffOp.laplacian()

def parity_op():
    return DiffOp.parity()


def sdot_x():
    """sigma . x as a multiplication operator."""
    comps = [ScalarExpr.zero()] + [ScalarExpr.x(a) for a in (1, 2, 3)]
    return DiffOp.mult(MatrixExpr(comps))


def sdot_n():
    """sigma . n with n = x/r."""
    rinv = ScalarExpr.r(-1)
    comps = [ScalarExpr.zero()] + [ScalarExpr.x(a) * rinv for a in (1, 2, 3)]
    return DiffOp.mult(MatrixExpr(comps))


def sdot_grad():
    """sigma . grad = i sigma . p."""
    out = DiffOp.zero()
    for a in (1, 2, 3):
        out = out + DiffOp.sigma(a) * DiffOp.dx(a)
    return out


def sdot_p():
    return sdot_grad().scale(-I)


def l_op(a):
    """Orbital momentum L_a = eps_abc x_b p_c."""
    out = DiffOp.zero()
    for b in (1, 2, 3):
        for c in (1, 2, 3):
            e = eps(a, b, c)
            if e:
                out = out + (x_op(b) * p_op(c)).scale(e)
    return out


def sdot_l():
    out = DiffOp.zero()
    for a in (1, 2, 3):
        out = out + DiffOp.sigma(a) * l_op(a)
    return out


def angular_a():
    """A = sigma.L + 1; anticommutes with sigma.n and sigma.p."""
    return sdot_l() + DiffOp.identity()


def j_op(a):
    """Total momentum J_a = L_a + sigma_a/2."""
    return l_op(a) + DiffOp.sigma(a).scale(Fraction(1, 2))


def j_squared():
    out = DiffOp.zero()
    for a in (1, 2, 3):
        ja = j_op(a)
        out = out + ja * ja
    return out


def dilation_op():
    """D = (x.p + p.x)/2 = x.p - 3i/2."""
    out = DiffOp.mult(ScalarExpr.const(GQ(0, Fraction(-3, 2))))
    for a in (1, 2, 3):
        out = out + x_op(a) * p_op(a)
    return out


def conformal_k():
    """K = x^2/2."""
    return DiffOp.mult(ScalarExpr.r(2) * Fraction(1, 2))


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------


def _dipole(profile):
    """sigma.x times a radial profile (the field F^a = x^a * profile)."""
    comps = [ScalarExpr.zero()] + [ScalarExpr.x(a) * profile for a in (1, 2, 3)]
    return DiffOp.mult(MatrixExpr(comps))


def build_hamiltonian(spec: ModelSpec) -> DiffOp:
    """Assemble the model Hamiltonian in the rescaled units of Ehat = 2mE."""
    model = spec.model
    if model == "h1":
        lam = spec.lam_expr()
        if lam.is_zero and not spec.allow_trivial_dipole:
            raise ModelError("h1 with lam = 0: dipole term requested but off")
        # certified sign: -lam sigma.x/x^3 pairs with Q1 = sigma.L+1+lam sigma.n
        return (
            -laplacian()
            + _dipole(-lam * ScalarExpr.r(-3))
            + DiffOp.mult(spec.phi_expr())
        )
    if model == "h2":
        f = spec.f_expr()
        fprime = _radial_derivative(f)
        alpha = spec.alpha_expr()
        return (
            -laplacian()
            + _dipole(fprime * ScalarExpr.r(-1))
            + DiffOp.mult(f * f - alpha * ScalarExpr.r(-1))
        )
    if model == "h3":
        lam = spec.lam_expr()
        if lam.is_zero and not spec.allow_trivial_dipole:
            raise ModelError("h3 with lam = 0: dipole term requested but off")
        alpha = spec.alpha_expr()
        return (
            -laplacian()
            + _dipole(-lam * ScalarExpr.r(-3))
            + DiffOp.mult(lam * lam * ScalarExpr.r(-2) - alpha * ScalarExpr.r(-1))
        )
    if model == "h4":
        lam = spec.lam_expr()
        if lam.is_zero and not spec.allow_trivial_dipole:
            raise ModelError("h4 with lam = 0: dipole term requested but off")
        return -laplacian() + _dipole(lam * ScalarExpr.r(-2))
    raise ModelError("unknown model %r" % (model,))


def _radial_derivative(expr):
    """d/dr of a radial expression; abstract jets get their order raised."""
    if expr.is_radial():
        return expr.derive_r()
    raise ModelError("expected a radial expression")


# ---------------------------------------------------------------------------
# integrals of motion
# ---------------------------------------------------------------------------


def build_integral(name: str, spec: ModelSpec) -> DiffOp:
    name = name.lower()
    if name not in INTEGRALS:
        raise ModelError("unknown integral id %r" % (name,))
    if spec.model not in COMPATIBLE[name]:
        raise ModelError("integral %s is not an integral of motion of %s"
                         % (name, spec.model))
    if name in ("j1", "j2", "j3"):
        return j_op(int(name[1]))
    if name == "q1":
        lam = spec.lam_expr()
        return angular_a() + sdot_n().scale(lam)
    if name == "q2":
        return _q2(spec.f_expr(), spec.alpha_expr())
    if name == "q3":
        lam = spec.lam_expr()
        return _q2(lam * ScalarExpr.r(-1), spec.alpha_expr())
    if name == "q4":
        return angular_a() * parity_op()
    if name == "q5":
        return _q5_certified(spec)
    if name in ("r1", "r2", "r3"):
        return runge_lenz(int(name[1]), spec)
    if name == "d":
        return dilation_op()
    if name == "k":
        return conformal_k()
    raise AssertionError


def _q2(f, alpha):
    """Q2 = (i sigma.p + f)(sigma.L + 1) + (alpha/2) sigma.n, printed order."""
    return (sdot_grad() + DiffOp.mult(f)) * angular_a() + sdot_n().scale(
        alpha * Fraction(1, 2)
    )


def _q5_certified(spec):
    """First-order reflection symmetry of h3.

    The printed form (sigma.p + f)p + alpha sigma.n cannot commute with h2
    for any variant (the parity-free part would need to be an integral by
    itself); the certified operator exists for f = lam/x only:

        Q5 = (i sigma.p + f - alpha/(2 lam)) p
    """
    lam = spec.lam_expr()
    alpha = spec.alpha_expr()
    if spec.model == "h3":
        f = lam * ScalarExpr.r(-1)
    else:
        f = spec.f_expr()
    shift = alpha * _scalar_inverse(lam) * Fraction(-1, 2)
    return (sdot_grad() + DiffOp.mult(f + shift)) * parity_op()


def q5_printed(spec):
    """Verbatim printed Q5 = (sigma.p + f)p + alpha sigma.n (fails the test)."""
    f = spec.f_expr() if spec.model == "h2" else spec.lam_expr() * ScalarExpr.r(-1)
    alpha = spec.alpha_expr()
    return (sdot_p() + DiffOp.mult(f)) * parity_op() + sdot_n().scale(alpha)


def _scalar_inverse(expr):
    """Inverse of a single-term scalar (monomial in r and params)."""
    if len(expr.terms) != 1:
        raise ModelError("cannot invert a multi-term scalar symbolically")
    ((xe, rp, jets, params),), (c,) = zip(*expr.terms.items())
    if xe != (0, 0, 0) or jets:
        raise ModelError("cannot invert a non-monomial scalar")
    inv_params = tuple((pid, -power) for pid, power in params)
    return ScalarExpr({(xe, -rp, (), inv_params): GQ(1) / c})


def runge_lenz(a, spec: ModelSpec) -> DiffOp:
    """Runge-Lenz vector with spin for h4.

    R_a = ((p x J - J x p)_a + lam x_a (sigma.x)/x^2) / 2.  The 1/2 must
    multiply the zero-order term as well: with the tail coefficient lam
    instead of lam/2 the commutator with h4 does not vanish.
    """
    lam = spec.lam_expr()
    out = DiffOp.zero()
    for b in (1, 2, 3):
        for c in (1, 2, 3):
            e = eps(a, b, c)
            if e:
                term = p_op(b) * j_op(c) - j_op(b) * p_op(c)
                out = out + term.scale(Fraction(e, 2))
    tail = MatrixExpr(
        [ScalarExpr.zero()]
        + [
            ScalarExpr.x(a) * ScalarExpr.x(b) * ScalarExpr.r(-2) * lam * Fraction(1, 2)
            for b in (1, 2, 3)
        ]
    )
    return out + DiffOp.mult(tail)


# ---------------------------------------------------------------------------
# relation registry
# ---------------------------------------------------------------------------


@dataclass
class CheckRecord:
    name: str
    citation: str
    zero: bool
    residual_terms: int
    note: str = ""


@dataclass
class RelationReport:
    rel_id: str
    checks: list = field(default_factory=list)

    @property
    def zero(self):
        return all(c.zero for c in self.checks)


RELATION_IDS = (
    "sq1", "sq2", "sq3", "sq4a", "sq4b", "sq4c",
    "CA-all", "core-all", "SCR",
    "H-J-commute", "Q4-commutes", "Q5-commutes",
)


def _record(report, name, citation, residual, note=""):
    report.checks.append(
        CheckRecord(name, citation, residual.is_zero, len(residual.terms), note)
    )


def check_relation(rel_id: str) -> RelationReport:
    """Verify one algebraic relation from the registry symbolically."""
    if rel_id not in RELATION_IDS:
        raise ModelError("unknown relation id %r" % (rel_id,))
    rep = RelationReport(rel_id)
    lam = ScalarExpr.param("lam")
    alpha = ScalarExpr.param("alpha")

    if rel_id == "sq1":
        q1 = build_integral("q1", ModelSpec("h1"))
        target = j_squared() + DiffOp.mult(lam * lam + Fraction(1, 4))
        _record(rep, "Q1^2 = J^2 + lam^2 + 1/4", "sq1", q1 * q1 - target)

    elif rel_id == "sq2":
        spec = ModelSpec("h2")
        q2 = build_integral("q2", spec)
        h2 = build_hamiltonian(spec)
        target = (j_squared() + DiffOp.mult(Fraction(1, 4))) * h2 + DiffOp.mult(
            alpha * alpha * Fraction(1, 4)
        )
        _record(rep, "Q2^2 = (J^2+1/4) H2 + alpha^2/4", "sq2", q2 * q2 - target)

    elif rel_id == "sq3":
        spec = ModelSpec("h3")
        q3 = build_integral("q3", spec)
        h3 = build_hamiltonian(spec)
        target = (j_squared() + DiffOp.mult(Fraction(1, 4))) * h3 + DiffOp.mult(
            alpha * alpha * Fraction(1, 4)
        )
        _record(rep, "Q3^2 = (J^2+1/4) H3 + alpha^2/4", "sq3", q3 * q3 - target)

    elif rel_id == "sq4a":
        spec = ModelSpec("h3")
        q1 = build_integral("q1", spec)
        q3 = build_integral("q3", spec)
        resid = q1.anticommutator(q3) - DiffOp.mult(alpha * lam)
        _record(rep, "{Q1,Q3} = alpha*lam", "sq4", resid)

    elif rel_id == "sq4b":
        spec = ModelSpec("h3")
        q1 = build_integral("q1", spec)
        q3 = build_integral("q3", spec)
        _record(rep, "[Q1^2, Q3] = 0", "sq4", (q1 * q1).commutator(q3))

    elif rel_id == "sq4c":
        spec = ModelSpec("h3")
        q1 = build_integral("q1", spec)
        q3 = build_integral("q3", spec)
        _record(rep, "[Q3^2, Q1] = 0", "sq4", (q3 * q3).commutator(q1))

    elif rel_id == "CA-all":
        _check_conformal(rep)

    elif rel_id == "core-all":
        _check_core(rep)

    elif rel_id == "SCR":
        h3spec = ModelSpec("h3")
        for qname, spec in (("q1", h3spec), ("q2", ModelSpec("h2")), ("q3", h3spec)):
            q = build_integral(qname, spec)
            for a in (1, 2, 3):
                _record(
                    rep,
                    "[%s, J%d] = 0" % (qname.upper(), a),
                    "SCR",
                    q.commutator(j_op(a)),
                )

    elif rel_id == "H-J-commute":
        for model in MODELS:
            h = build_hamiltonian(ModelSpec(model))
            for a in (1, 2, 3):
                _record(rep, "[%s, J%d] = 0" % (model.upper(), a), "om",
                        h.commutator(j_op(a)))

    elif rel_id == "Q4-commutes":
        for model in MODELS:
            spec = ModelSpec(model)
            h = build_hamiltonian(spec)
            q4 = build_integral("q4", spec)
            _record(rep, "[%s, Q4] = 0" % model.upper(), "P", h.commutator(q4))

    elif rel_id == "Q5-commutes":
        spec = ModelSpec("h3")
        h3 = build_hamiltonian(spec)
        q5 = build_integral("q5", spec)
        _record(rep, "[H3, Q5] = 0", "Q5", h3.commutator(q5),
                note="certified variant (i sigma.p + f - alpha/(2 lam)) p")

    return rep


def _check_conformal(rep):
    """so(2,1) + so(3) + <Q1> closure for h1 with phi = alpha/x^2."""
    alpha = ScalarExpr.param("alpha")
    spec = ModelSpec("h1", phi=alpha * ScalarExpr.r(-2))
    h = build_hamiltonian(spec)
    d = dilation_op()
    k = conformal_k()
    q1 = build_integral("q1", spec)
    _record(rep, "[H1, D] = -2i H1", "CA", h.commutator(d) - h.scale(GQ(0, -2)))
    # printed constant is i; the closing constant for K = x^2/2 is 2i
    _record(rep, "[K, H1] = 2i D", "CA", k.commutator(h) - d.scale(GQ(0, 2)),
            note="printed [K,H1] = iD; certified factor 2i")
    _record(rep, "[K, D] = 2i K", "CA", k.commutator(d) - k.scale(GQ(0, 2)))
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        _record(rep, "[J%d, J%d] = i J%d" % (a, b, c), "CA",
                j_op(a).commutator(j_op(b)) - j_op(c).scale(I))
    # all remaining commutators vanish
    _record(rep, "[H1, Q1] = 0", "CA", h.commutator(q1))
    for a in (1, 2, 3):
        ja = j_op(a)
        _record(rep, "[D, J%d] = 0" % a, "CA", d.commutator(ja))
        _record(rep, "[K, J%d] = 0" % a, "CA", k.commutator(ja))
        _record(rep, "[H1, J%d] = 0" % a, "CA", h.commutator(ja))
    _record(rep, "[Q1, D] = 0", "CA", q1.commutator(d))
    _record(rep, "[Q1, K] = 0", "CA", q1.commutator(k))
    for a in (1, 2, 3):
        _record(rep, "[Q1, J%d] = 0" % a, "CA", q1.commutator(j_op(a)))


def _check_core(rep):
    """o(4)-type relations for h4 with the Runge-Lenz vector."""
    spec = ModelSpec("h4")
    h4 = build_hamiltonian(spec)
    r_ops = {a: build_integral("r%d" % a, spec) for a in (1, 2, 3)}
    for a in (1, 2, 3):
        _record(rep, "[H4, R%d] = 0" % a, "core", h4.commutator(r_ops[a]))
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        _record(rep, "[J%d, J%d] = i J%d" % (a, b, c), "core",
                j_op(a).commutator(j_op(b)) - j_op(c).scale(I))
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            target = DiffOp.zero()
            for c in (1, 2, 3):
                e = eps(a, b, c)
                if e:
                    target = target + r_ops[c].scale(GQ(0, e))
            _record(rep, "[R%d, J%d] = i eps R" % (a, b), "core",
                    r_ops[a].commutator(j_op(b)) - target)
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        target = (j_op(c) * h4).scale(GQ(0, -1))
        _record(rep, "[R%d, R%d] = -i J%d H4" % (a, b, c), "core",
                r_ops[a].commutator(r_ops[b]) - target,
                note="printed constant -2i; certified -i for the 1/2-normalized R")


def catalog_pairs():
    """Every (model, integral) pair whose commutator must vanish identically."""
    pairs = []
    for model in MODELS:
        for a in (1, 2, 3):
            pairs.append((model, "j%d" % a))
        pairs.append((model, "q4"))
    pairs += [
        ("h1", "q1"), ("h2", "q2"),
        ("h3", "q1"), ("h3", "q3"), ("h3", "q5"),
        ("h4", "r1"), ("h4", "r2"), ("h4", "r3"),
    ]
    return pairs


def substitution_identities():
    """h3 = h1|_{phi=lam^2/x^2-alpha/x} = h2|_{f=lam/x}; q3 = q2|_{f=lam/x}."""
    lam = ScalarExpr.param("lam")
    alpha = ScalarExpr.param("alpha")
    h3 = build_hamiltonian(ModelSpec("h3"))
    h1_bound = build_hamiltonian(
        ModelSpec("h1", phi=lam * lam * ScalarExpr.r(-2) - alpha * ScalarExpr.r(-1))
    )
    h2_bound = build_hamiltonian(ModelSpec("h2", f=lam * ScalarExpr.r(-1)))
    q3 = build_integral("q3", ModelSpec("h3"))
    q2_bound = build_integral("q2", ModelSpec("h2")).subs_radial(
        {"f": lam * ScalarExpr.r(-1)}
    )
    return {
        "h3_vs_h1": h3 - h1_bound,
        "h3_vs_h2": h3 - h2_bound,
        "q3_vs_q2": q3 - q2_bound,
    }
