"""Exact Gaussian-rational arithmetic.

A ``GaussRat`` is an element of Q(i): a pair of arbitrary-precision
rationals (real and imaginary part), always in lowest terms with positive
denominators.  This is the ground field for every polynomial in the
package; no floating point occurs anywhere downstream.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is an optional speedup
    from fractions import Fraction as _Q

_ZERO = _Q(0)
_ONE = _Q(1)


class GaussRat:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussRat):
            if im:
                raise ValueError("cannot combine GaussRat re with nonzero im")
            re, im = re.re, re.im
        self.re = _Q(re) if not isinstance(re, type(_ZERO)) else re
        self.im = _Q(im) if not isinstance(im, type(_ZERO)) else im

    # -- constructors -------------------------------------------------

    @classmethod
    def from_rational(cls, num, den=1):
        return cls(_Q(num, den))

    @classmethod
    def i(cls):
        return cls(0, 1)

    # -- predicates ----------------------------------------------------

    def is_zero(self):
        return not self.re and not self.im

    def is_one(self):
        return self.re == _ONE and not self.im

    def is_rational(self):
        return not self.im

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conj(self):
        return GaussRat(self.re, -self.im)

    def norm2(self):
        return self.re * self.re + self.im * self.im

    def inv(self):
        n = self.norm2()
        if not n:
            raise ZeroDivisionError("inverse of zero GaussRat")
        return GaussRat(self.re / n, -self.im / n)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inv()

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        out = GaussRat(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- comparison / hashing -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, type(_ZERO))):
            return self.re == other and not self.im
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    # -- display ---------------------------------------------------------

    def __repr__(self):
        return f"GaussRat({self.re!s}, {self.im!s})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            if self.im == _ONE:
                return "i"
            if self.im == -_ONE:
                return "-i"
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        im = "i" if mag == _ONE else f"{mag}*i"
        return f"{self.re}{sign}{im}"


def _coerce(x):
    if isinstance(x, GaussRat):
        return x
    if isinstance(x, (int, type(_ZERO))):
        return GaussRat(x)
    return NotImplemented


ZERO = GaussRat(0)
ONE = GaussRat(1)
I = GaussRat.i()


def rational(num, den=1):
    """Shorthand for an exact rational GaussRat."""
    return GaussRat(_Q(num, den))
