"""Gaussian rational numbers: a + b*i with Fraction components.

All symbolic coefficients in the operator algebra live here.  Floating
point is never used on the symbolic side, so zero-testing stays exact.
"""

from __future__ import annotations

from fractions import Fraction


class GQ:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    # -- queries ----------------------------------------------------------

    def is_zero(self):
        return not self.re and not self.im

    def is_real(self):
        return not self.im

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        return GQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return GQ(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return GQ(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        d = other.re * other.re + other.im * other.im
        if not d:
            raise ZeroDivisionError("division by zero GQ")
        return GQ(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __neg__(self):
        return GQ(-self.re, -self.im)

    def conjugate(self):
        return GQ(self.re, -self.im)

    # -- comparisons / hashing ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GQ):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    # -- conversion ----------------------------------------------------------

    def to_complex(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return "%s*i" % self.im
        sign = "+" if self.im > 0 else "-"
        return "(%s%s%s*i)" % (self.re, sign, abs(self.im))


def _coerce(v):
    if isinstance(v, GQ):
        return v
    if isinstance(v, (int, Fraction)):
        return GQ(v)
    raise TypeError("cannot coerce %r to GQ" % (v,))


ZERO = GQ(0)
ONE = GQ(1)
I = GQ(0, 1)
HALF = GQ(Fraction(1, 2))
