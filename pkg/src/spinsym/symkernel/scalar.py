"""Exact scalar expressions on R^3 minus the origin.

A ScalarExpr is a finite GQ-linear combination of monomials

    x1^e1 * x2^e2 * x3^e3 * r^k * (jets of abstract radial functions) * params

with e1 in {0,1} (the relation x1^2 = r^2 - x2^2 - x3^2 is applied on
construction), e2, e3 >= 0, k any integer, jet factors f^(n)(r) raised to
positive powers, and commuting symbolic parameters with integer exponents.
The representation is a canonical normal form for the quotient ring, so an
expression is identically zero on R^3 \\ {0} iff its term dict is empty.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .gq import GQ, ONE, _coerce

# Monomial key layout:
#   (xe, rp, jets, params)
# xe     -- (e1, e2, e3) with e1 in {0, 1}
# rp     -- integer power of r
# jets   -- sorted tuple of (fid, order, power), power >= 1
# params -- sorted tuple of (pid, power), power != 0 (negative allowed)

_XE0 = (0, 0, 0)


def _merge_pairs(pairs):
    out = {}
    for key, p in pairs:
        out[key] = out.get(key, 0) + p
    return tuple(sorted((k, p) for k, p in out.items() if p))


def _merge_jets(jets_a, jets_b):
    out = {}
    for fid, order, power in jets_a + jets_b:
        out[(fid, order)] = out.get((fid, order), 0) + power
    return tuple(
        sorted((fid, order, p) for (fid, order), p in out.items() if p)
    )


class ScalarExpr:
    """Canonical scalar expression; immutable once built."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        # terms maps monomial key -> GQ; callers must pass canonical data.
        self.terms = terms or {}

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero():
        return ScalarExpr()

    @staticmethod
    def const(value):
        c = _coerce(value) if not isinstance(value, GQ) else value
        if c.is_zero():
            return ScalarExpr()
        return ScalarExpr({(_XE0, 0, (), ()): c})

    @staticmethod
    def x(axis):
        if axis not in (1, 2, 3):
            raise ValueError("axis must be 1, 2 or 3")
        xe = tuple(1 if a == axis else 0 for a in (1, 2, 3))
        return ScalarExpr({(xe, 0, (), ()): ONE})

    @staticmethod
    def r(power=1):
        return ScalarExpr({(_XE0, power, (), ()): ONE})

    @staticmethod
    def param(name, power=1):
        return ScalarExpr({(_XE0, 0, (), ((name, power),)): ONE})

    @staticmethod
    def jet(fid, order=0):
        return ScalarExpr({(_XE0, 0, ((fid, order, 1),), ()): ONE})

    # -- basic queries -------------------------------------------------------

    @property
    def is_zero(self):
        return not self.terms

    def is_radial(self):
        """True if no x-monomials appear (pure function of r and params)."""
        return all(key[0] == _XE0 for key in self.terms)

    def __eq__(self, other):
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    # -- ring operations ------------------------------------------------------

    def __add__(self, other):
        other = _to_scalar(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            acc = out.get(key)
            s = c if acc is None else acc + c
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
        return ScalarExpr(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_to_scalar(other))

    def __rsub__(self, other):
        return _to_scalar(other) + (-self)

    def __neg__(self):
        return ScalarExpr({key: -c for key, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GQ)):
            c = other if isinstance(other, GQ) else GQ(other)
            if c.is_zero():
                return ScalarExpr()
            return ScalarExpr({key: v * c for key, v in self.terms.items()})
        other = _to_scalar(other)
        out = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                c = ca * cb
                for key, factor in _mul_mono(ka, kb):
                    _accum(out, key, c * factor)
        return ScalarExpr(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers of general expressions")
        result = ScalarExpr.const(1)
        for _ in range(n):
            result = result * self
        return result

    # -- calculus --------------------------------------------------------------

    def derive(self, axis):
        """Partial derivative d/dx_axis with the radial chain rule on jets."""
        out = {}
        a = axis - 1
        for (xe, rp, jets, params), c in self.terms.items():
            # polynomial part
            if xe[a]:
                new_xe = list(xe)
                new_xe[a] -= 1
                _accum(out, (tuple(new_xe), rp, jets, params), c * xe[a])
            # r^k part: d r^k = k x_a r^(k-2)
            if rp:
                base = (xe, rp - 2, jets, params)
                for key, factor in _mono_times_x(base, axis):
                    _accum(out, key, c * rp * factor)
            # jets: d f^(n)(r)^p = p f^(n)^(p-1) f^(n+1) x_a / r
            for idx, (fid, order, power) in enumerate(jets):
                new_jets = _merge_jets(
                    jets[:idx] + jets[idx + 1 :],
                    ((fid, order, power - 1), (fid, order + 1, 1)),
                )
                base = (xe, rp - 1, new_jets, params)
                for key, factor in _mono_times_x(base, axis):
                    _accum(out, key, c * power * factor)
        return ScalarExpr(out)

    def derive_r(self):
        """d/dr for purely radial expressions."""
        out = {}
        for (xe, rp, jets, params), c in self.terms.items():
            if xe != _XE0:
                raise ValueError("derive_r on a non-radial expression")
            if rp:
                _accum(out, (xe, rp - 1, jets, params), c * rp)
            for idx, (fid, order, power) in enumerate(jets):
                new_jets = _merge_jets(
                    jets[:idx] + jets[idx + 1 :],
                    ((fid, order, power - 1), (fid, order + 1, 1)),
                )
                _accum(out, (xe, rp, new_jets, params), c * power)
        return ScalarExpr(out)

    def reflect(self):
        """Pullback under x -> -x; r, radial jets and params are even."""
        out = {}
        for key, c in self.terms.items():
            xe = key[0]
            sign = -1 if (xe[0] + xe[1] + xe[2]) % 2 else 1
            out[key] = c * sign
        return ScalarExpr(out)

    # -- substitution / evaluation ------------------------------------------------

    def subs_radial(self, bindings):
        """Replace jets of bound function ids by exact radial expressions.

        bindings maps fid -> radial ScalarExpr (powers of r and params only).
        Derivatives of the binding are generated as needed.
        """
        closed = {}
        for fid, expr in bindings.items():
            expr = _to_scalar(expr)
            if not expr.is_radial():
                raise ValueError("binding for %r is not radial" % fid)
            if any(key[2] for key in expr.terms):
                raise ValueError("binding for %r contains jets" % fid)
            closed[fid] = [expr]

        def deriv(fid, order):
            seq = closed[fid]
            while len(seq) <= order:
                seq.append(seq[-1].derive_r())
            return seq[order]

        out = ScalarExpr()
        for (xe, rp, jets, params), c in self.terms.items():
            kept = tuple(j for j in jets if j[0] not in closed)
            factor = ScalarExpr({(xe, rp, kept, params): c})
            for fid, order, power in jets:
                if fid in closed:
                    factor = factor * deriv(fid, order) ** power
            out = out + factor
        return out

    def subs_params(self, values):
        """Substitute exact values (GQ/Fraction/int) for parameters."""
        out = {}
        for (xe, rp, jets, params), c in self.terms.items():
            coeff = c
            kept = []
            for pid, power in params:
                if pid in values:
                    v = values[pid]
                    v = v if isinstance(v, GQ) else GQ(v)
                    if power >= 0:
                        for _ in range(power):
                            coeff = coeff * v
                    else:
                        for _ in range(-power):
                            coeff = coeff / v
                else:
                    kept.append((pid, power))
            if not coeff.is_zero():
                _accum(out, (xe, rp, jets, tuple(kept)), coeff)
        return ScalarExpr(out)

    def evaluate(self, xyz, jet_values=None, param_values=None):
        """Numeric evaluation at a point; jets/params supplied by the caller."""
        x1, x2, x3 = xyz
        r = math.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
        jet_values = jet_values or {}
        param_values = param_values or {}
        total = 0j
        for (xe, rp, jets, params), c in self.terms.items():
            v = complex(c.to_complex())
            v *= x1 ** xe[0] * x2 ** xe[1] * x3 ** xe[2] * r**rp
            for fid, order, power in jets:
                v *= jet_values[(fid, order)] ** power
            for pid, power in params:
                v *= param_values[pid] ** power
            total += v
        return total

    # -- presentation ---------------------------------------------------------------

    def to_text(self):
        """Deterministic text form: sorted terms, explicit exponents."""
        if not self.terms:
            return "0"
        chunks = []
        for key in sorted(self.terms, key=_sort_key):
            xe, rp, jets, params = key
            c = self.terms[key]
            pieces = [repr(c)]
            for a, e in zip((1, 2, 3), xe):
                if e:
                    pieces.append("x%d^%d" % (a, e))
            if rp:
                pieces.append("r^%d" % rp)
            for fid, order, power in jets:
                name = fid + "'" * order if order <= 3 else "%s^(%d)" % (fid, order)
                pieces.append(name if power == 1 else "%s^%d" % (name, power))
            for pid, power in params:
                pieces.append(pid if power == 1 else "%s^%d" % (pid, power))
            chunks.append("*".join(pieces))
        return " + ".join(chunks)

    def __repr__(self):
        return "ScalarExpr(%s)" % self.to_text()


# -- monomial helpers ---------------------------------------------------------


def _accum(store, key, value):
    acc = store.get(key)
    s = value if acc is None else acc + value
    if s.is_zero():
        store.pop(key, None)
    else:
        store[key] = s


def _x1_square_expand(e2, e3, rp, jets, params):
    # x1^2 -> r^2 - x2^2 - x3^2
    return [
        (((0, e2, e3), rp + 2, jets, params), ONE),
        (((0, e2 + 2, e3), rp, jets, params), GQ(-1)),
        (((0, e2, e3 + 2), rp, jets, params), GQ(-1)),
    ]


def _normalize_e1(e1, e2, e3, rp, jets, params):
    if e1 <= 1:
        return [(((e1, e2, e3), rp, jets, params), ONE)]
    out = []
    for (xe, rp2, j2, p2), factor in _x1_square_expand(e2, e3, rp, jets, params):
        for key, f2 in _normalize_e1(
            e1 - 2 + xe[0], xe[1], xe[2], rp2, j2, p2
        ):
            out.append((key, factor * f2))
    return out


def _mul_mono(ka, kb):
    (xa, ra, ja, pa) = ka
    (xb, rb, jb, pb) = kb
    e1 = xa[0] + xb[0]
    e2 = xa[1] + xb[1]
    e3 = xa[2] + xb[2]
    jets = _merge_jets(ja, jb)
    params = _merge_pairs(list(pa) + list(pb))
    return _normalize_e1(e1, e2, e3, ra + rb, jets, params)


def _mono_times_x(key, axis):
    (xe, rp, jets, params) = key
    new = list(xe)
    new[axis - 1] += 1
    return _normalize_e1(new[0], new[1], new[2], rp, jets, params)


def _sort_key(key):
    xe, rp, jets, params = key
    return (xe, rp, jets, params)


def _to_scalar(v):
    if isinstance(v, ScalarExpr):
        return v
    if isinstance(v, (int, Fraction, GQ)):
        return ScalarExpr.const(v)
    raise TypeError("cannot interpret %r as ScalarExpr" % (v,))
