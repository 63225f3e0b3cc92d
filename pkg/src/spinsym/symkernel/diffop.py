"""Normal-ordered matrix differential operators with a parity flag.

A DiffOp is a finite sum of terms

    M(x) * d^(d1,d2,d3) * P^p

with M a MatrixExpr coefficient, derivatives acting rightmost and the space
inversion P (if present) pushed to the very right using P x_a = -x_a P and
P d_a = -d_a P.  Composition uses the Leibniz rule, so products, commutators
and anticommutators stay in normal form and equality is decidable term-wise.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb

from .gq import GQ, I
from .matrix import MatrixExpr, _to_matrix
from .scalar import ScalarExpr


class DiffOp:
    """Sum of normal-ordered terms keyed by (derivative multi-index, parity)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms or {}

    # -- constructors ------------------------------------------------------------

    @staticmethod
    def zero():
        return DiffOp()

    @staticmethod
    def mult(coeff):
        """Multiplication operator by a scalar or matrix expression."""
        m = _to_matrix(coeff)
        if m.is_zero:
            return DiffOp()
        return DiffOp({((0, 0, 0), 0): m})

    @staticmethod
    def identity():
        return DiffOp.mult(1)

    @staticmethod
    def dx(axis):
        d = [0, 0, 0]
        d[axis - 1] = 1
        return DiffOp({(tuple(d), 0): MatrixExpr.scalar(ScalarExpr.const(1))})

    @staticmethod
    def momentum(axis):
        """p_a = -i d_a."""
        d = [0, 0, 0]
        d[axis - 1] = 1
        return DiffOp({(tuple(d), 0): MatrixExpr.scalar(ScalarExpr.const(-I))})

    @staticmethod
    def parity():
        return DiffOp({((0, 0, 0), 1): MatrixExpr.scalar(ScalarExpr.const(1))})

    @staticmethod
    def sigma(mu, coeff=1):
        return DiffOp.mult(MatrixExpr.sigma(mu, coeff))

    @staticmethod
    def laplacian():
        out = DiffOp()
        for a in (1, 2, 3):
            d = [0, 0, 0]
            d[a - 1] = 2
            out = out + DiffOp({(tuple(d), 0): MatrixExpr.scalar(ScalarExpr.const(1))})
        return out

    # -- queries --------------------------------------------------------------------

    @property
    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.terms == other.terms

    def max_order(self):
        return max((sum(d) for d, _ in self.terms), default=0)

    # -- linear structure ----------------------------------------------------------------

    def __add__(self, other):
        other = _to_diffop(other)
        out = dict(self.terms)
        for key, m in other.terms.items():
            acc = out.get(key)
            s = m if acc is None else acc + m
            if s.is_zero:
                out.pop(key, None)
            else:
                out[key] = s
        return DiffOp(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_to_diffop(other))

    def __rsub__(self, other):
        return _to_diffop(other) + (-self)

    def __neg__(self):
        return DiffOp({key: -m for key, m in self.terms.items()})

    def scale(self, factor):
        out = {}
        for key, m in self.terms.items():
            sm = m.scale(factor) if isinstance(factor, (int, Fraction, GQ, ScalarExpr)) else m * factor
            if not sm.is_zero:
                out[key] = sm
        return DiffOp(out)

    # -- composition -------------------------------------------------------------------------

    def __mul__(self, other):
        """Operator composition self o other, renormal-ordered."""
        if isinstance(other, (int, Fraction, GQ)):
            return self.scale(other)
        other = _to_diffop(other)
        out = {}
        for (alpha, p), ma in self.terms.items():
            for (beta, q), mb in other.terms.items():
                mb_eff = mb.reflect() if p else mb
                sign = -1 if (p and sum(beta) % 2) else 1
                # Leibniz: d^alpha (B u) = sum_{g<=alpha} C(alpha,g) (d^g B) d^(alpha-g) u
                derivs = {(0, 0, 0): mb_eff}
                for g in product(
                    range(alpha[0] + 1), range(alpha[1] + 1), range(alpha[2] + 1)
                ):
                    mg = _cached_derivative(derivs, g)
                    if mg.is_zero:
                        continue
                    c = (
                        comb(alpha[0], g[0])
                        * comb(alpha[1], g[1])
                        * comb(alpha[2], g[2])
                        * sign
                    )
                    coeff = ma * mg
                    if c != 1:
                        coeff = coeff.scale(c)
                    if coeff.is_zero:
                        continue
                    dm = (
                        alpha[0] - g[0] + beta[0],
                        alpha[1] - g[1] + beta[1],
                        alpha[2] - g[2] + beta[2],
                    )
                    key = (dm, (p + q) % 2)
                    acc = out.get(key)
                    s = coeff if acc is None else acc + coeff
                    if s.is_zero:
                        out.pop(key, None)
                    else:
                        out[key] = s
        return DiffOp(out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GQ)):
            return self.scale(other)
        return _to_diffop(other) * self

    # -- derived operations ----------------------------------------------------------------------

    def commutator(self, other):
        other = _to_diffop(other)
        return self * other - other * self

    def anticommutator(self, other):
        other = _to_diffop(other)
        return self * other + other * self

    def subs_radial(self, bindings):
        out = {}
        for key, m in self.terms.items():
            sm = m.subs_radial(bindings)
            if not sm.is_zero:
                out[key] = sm
        return DiffOp(out)

    def subs_params(self, values):
        out = {}
        for key, m in self.terms.items():
            sm = m.subs_params(values)
            if not sm.is_zero:
                out[key] = sm
        return DiffOp(out)

    # -- presentation -------------------------------------------------------------------------------

    def to_text(self):
        if not self.terms:
            return "0"
        chunks = []
        for key in sorted(self.terms):
            (d, p), m = key, self.terms[key]
            ops = []
            for a, e in zip((1, 2, 3), d):
                if e:
                    ops.append("d%d^%d" % (a, e))
            if p:
                ops.append("P")
            head = "*".join(ops) if ops else "1"
            chunks.append("(%s) %s" % (m.to_text(), head))
        return "  +  ".join(chunks)

    def __repr__(self):
        return "DiffOp(%s)" % self.to_text()


def _cached_derivative(cache, g):
    """Mixed partial d^g of the cached base coefficient, built incrementally."""
    if g in cache:
        return cache[g]
    for axis in (1, 2, 3):
        if g[axis - 1]:
            prev = list(g)
            prev[axis - 1] -= 1
            base = _cached_derivative(cache, tuple(prev))
            cache[g] = base.derive(axis)
            return cache[g]
    raise AssertionError("unreachable")


def commutator(a, b):
    return _to_diffop(a).commutator(b)


def anticommutator(a, b):
    return _to_diffop(a).anticommutator(b)


def symmetrized(a, b):
    """{A, B} = AB + BA, the formally self-adjoint pairing."""
    return anticommutator(a, b)


def _to_diffop(v):
    if isinstance(v, DiffOp):
        return v
    if isinstance(v, (int, Fraction, GQ, ScalarExpr, MatrixExpr)):
        return DiffOp.mult(v)
    raise TypeError("cannot interpret %r as DiffOp" % (v,))
