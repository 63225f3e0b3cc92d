"""2x2 matrix expressions expanded over the Pauli basis sigma^0..sigma^3."""

from __future__ import annotations

from fractions import Fraction

from .gq import GQ, I
from .scalar import ScalarExpr, _to_scalar

# Levi-Civita symbol as a lookup: EPS[(a,b,c)] with 1-based spatial indices.
EPS = {}
for _a, _b, _c, _s in (
    (1, 2, 3, 1), (2, 3, 1, 1), (3, 1, 2, 1),
    (3, 2, 1, -1), (1, 3, 2, -1), (2, 1, 3, -1),
):
    EPS[(_a, _b, _c)] = _s


def eps(a, b, c):
    return EPS.get((a, b, c), 0)


class MatrixExpr:
    """Four ScalarExpr components: comps[mu] multiplies sigma^mu."""

    __slots__ = ("comps",)

    def __init__(self, comps=None):
        if comps is None:
            comps = (ScalarExpr(), ScalarExpr(), ScalarExpr(), ScalarExpr())
        self.comps = tuple(comps)

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero():
        return MatrixExpr()

    @staticmethod
    def scalar(expr):
        expr = _to_scalar(expr)
        return MatrixExpr((expr, ScalarExpr(), ScalarExpr(), ScalarExpr()))

    @staticmethod
    def sigma(mu, coeff=1):
        comps = [ScalarExpr()] * 4
        comps[mu] = _to_scalar(coeff)
        return MatrixExpr(comps)

    # -- queries ----------------------------------------------------------------

    @property
    def is_zero(self):
        return all(c.is_zero for c in self.comps)

    def __eq__(self, other):
        if not isinstance(other, MatrixExpr):
            return NotImplemented
        return self.comps == other.comps

    # -- linear structure ----------------------------------------------------------

    def __add__(self, other):
        other = _to_matrix(other)
        return MatrixExpr(tuple(a + b for a, b in zip(self.comps, other.comps)))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_to_matrix(other))

    def __neg__(self):
        return MatrixExpr(tuple(-c for c in self.comps))

    def scale(self, factor):
        """Multiply every component by a scalar factor (commutes with sigma)."""
        return MatrixExpr(tuple(c * factor for c in self.comps))

    # -- multiplication (sigma^a sigma^b = delta^ab + i eps^abc sigma^c) -------------

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GQ, ScalarExpr)):
            return self.scale(other)
        other = _to_matrix(other)
        a = self.comps
        b = other.comps
        out = [ScalarExpr(), ScalarExpr(), ScalarExpr(), ScalarExpr()]
        out[0] = a[0] * b[0]
        for k in (1, 2, 3):
            out[0] = out[0] + a[k] * b[k]
            out[k] = out[k] + a[0] * b[k] + a[k] * b[0]
        for j in (1, 2, 3):
            for k in (1, 2, 3):
                if j == k:
                    continue
                c = EPS_INDEX[(j, k)]
                out[c] = out[c] + (a[j] * b[k]) * (I * eps(j, k, c))
        return MatrixExpr(out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GQ, ScalarExpr)):
            return self.scale(other)
        return _to_matrix(other) * self

    # -- calculus and symmetry -----------------------------------------------------------

    def derive(self, axis):
        return MatrixExpr(tuple(c.derive(axis) for c in self.comps))

    def reflect(self):
        return MatrixExpr(tuple(c.reflect() for c in self.comps))

    def subs_radial(self, bindings):
        return MatrixExpr(tuple(c.subs_radial(bindings) for c in self.comps))

    def subs_params(self, values):
        return MatrixExpr(tuple(c.subs_params(values) for c in self.comps))

    # -- presentation --------------------------------------------------------------------

    def to_text(self):
        parts = []
        for mu, c in enumerate(self.comps):
            if not c.is_zero:
                parts.append("s%d*[%s]" % (mu, c.to_text()))
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return "MatrixExpr(%s)" % self.to_text()


# third index completing (j, k) to a Levi-Civita triple
EPS_INDEX = {
    (1, 2): 3, (2, 1): 3,
    (2, 3): 1, (3, 2): 1,
    (3, 1): 2, (1, 3): 2,
}


def _to_matrix(v):
    if isinstance(v, MatrixExpr):
        return v
    if isinstance(v, (int, Fraction, GQ, ScalarExpr)):
        return MatrixExpr.scalar(_to_scalar(v))
    raise TypeError("cannot interpret %r as MatrixExpr" % (v,))
