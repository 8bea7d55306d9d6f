"""Exact real arithmetic for the beta machinery.

Three number types flow through the greedy recursion:

* ``int`` / ``Fraction`` -- exact rationals;
* :class:`QuadNumber` -- ``a + b*sqrt(d)`` with rational ``a, b``; signs and
  floors are decided exactly;
* :class:`RationalInterval` -- a real known only to lie in ``[lo, hi]``; a
  floor or sign is returned only when the whole interval agrees, otherwise
  :class:`~symorbit.errors.PrecisionError` is raised.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import mpmath

from .errors import PrecisionError

DEFAULT_BITS = 256


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _squarefree_split(d: int) -> tuple[int, int]:
    """Write ``d = s*s*r`` with ``r`` squarefree; returns ``(s, r)``."""
    s, r, p = 1, d, 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            s *= p
        p += 1
    return s, r


def _in_float_range(q: Fraction) -> bool:
    return q.numerator.bit_length() - q.denominator.bit_length() < 1000 and q.denominator.bit_length() < 1000


class QuadNumber:
    """An element ``a + b*sqrt(d)`` of a real quadratic field."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        if d < 2:
            raise ValueError("d must be a non-square integer >= 2")
        s, r = _squarefree_split(d)
        if r == 1:
            raise ValueError(f"{d} is a perfect square")
        self.a = _frac(a)
        self.b = _frac(b) * s
        self.d = r

    @classmethod
    def from_parts(cls, a, b, c, d):
        """``(a + b*sqrt(d)) / c``; collapses to a ``Fraction`` when ``d`` is a square."""
        s, r = _squarefree_split(d)
        if r == 1:
            return Fraction(a + b * s, c)
        return cls(Fraction(a, c), Fraction(b, c), d)

    def _coerce(self, other):
        if isinstance(other, QuadNumber):
            if other.d != self.d:
                raise TypeError("cannot mix quadratic fields")
            return other.a, other.b
        if isinstance(other, (int, Rational)):
            return Fraction(other), Fraction(0)
        return NotImplemented

    def _make(self, a, b):
        if b == 0:
            return a
        out = QuadNumber.__new__(QuadNumber)
        out.a, out.b, out.d = a, b, self.d
        return out

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._make(self.a + o[0], self.b + o[1])

    __radd__ = __add__

    def __neg__(self):
        return self._make(-self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._make(self.a - o[0], self.b - o[1])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = o
        return self._make(self.a * a + self.b * b * self.d, self.a * b + self.b * a)

    __rmul__ = __mul__

    def inverse(self):
        norm = self.a * self.a - self.b * self.b * self.d
        return self._make(self.a / norm, -self.b / norm)

    def __truediv__(self, other):
        if isinstance(other, QuadNumber):
            return self * other.inverse()
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._make(self.a / o[0], self.b / o[0])

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = Fraction(1), self
        while k:
            if k & 1:
                out = base * out
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa if sa else sb
        if sa == 0:
            return sb
        return sa if self.a * self.a > self.b * self.b * self.d else sb

    def _cmp(self, other):
        diff = self - other
        return sign(diff)

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, float) else NotImplemented
        if o is NotImplemented:
            return NotImplemented
        return self.a == o[0] and self.b == o[1]

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        same_sign = (self.a > 0) == (self.b > 0) or self.a == 0
        if not same_sign:
            # opposite signs cancel; the conjugate form (a^2 - b^2 d)/(a - b sqrt d) does not
            norm = self.a * self.a - self.b * self.b * self.d
        if _in_float_range(self.a) and _in_float_range(self.b):
            a, b = float(self.a), float(self.b)
            return a + b * math.sqrt(self.d) if same_sign else float(norm) / (a - b * math.sqrt(self.d))
        a = mpmath.mpf(self.a.numerator) / self.a.denominator
        b = mpmath.mpf(self.b.numerator) / self.b.denominator
        root = mpmath.sqrt(self.d)
        if same_sign:
            return float(a + b * root)
        return float((mpmath.mpf(norm.numerator) / norm.denominator) / (a - b * root))

    def __floor__(self):
        k = math.floor(float(self))
        while self < k:
            k -= 1
        while self >= k + 1:
            k += 1
        return k

    def interval(self, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
        """Rational bounds of width at most ``2**-bits``."""
        scale = 1 << (bits + 2)
        # isqrt bounds sqrt(d * scale^2) to within one unit
        r = math.isqrt(self.d * scale * scale)
        lo_s, hi_s = Fraction(r, scale), Fraction(r + 1, scale)
        if self.b >= 0:
            return self.a + self.b * lo_s, self.a + self.b * hi_s
        return self.a + self.b * hi_s, self.a + self.b * lo_s

    def __repr__(self):
        return f"QuadNumber({self.a}, {self.b}, {self.d})"

    def __str__(self):
        return f"{self.a} + {self.b}*sqrt({self.d})"


class RationalInterval:
    """A real number known only up to an enclosing rational interval."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo, hi = _frac(lo), _frac(hi)
        if lo > hi:
            raise ValueError("empty interval")
        self.lo, self.hi = lo, hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def _coerce(self, other):
        if isinstance(other, RationalInterval):
            return other
        if isinstance(other, (int, Rational)):
            return RationalInterval(other, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RationalInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.lo <= 0 <= o.hi:
            raise PrecisionError("division by an interval containing zero")
        return self * RationalInterval(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sign(self) -> int:
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        raise PrecisionError(f"sign undecided on interval of width {float(self.width):.3g}")

    def __lt__(self, other):
        return sign(self - other) < 0

    def __le__(self, other):
        return sign(self - other) <= 0

    def __gt__(self, other):
        return sign(self - other) > 0

    def __ge__(self, other):
        return sign(self - other) >= 0

    def __float__(self):
        return float((self.lo + self.hi) / 2)

    def __floor__(self):
        a, b = math.floor(self.lo), math.floor(self.hi)
        if a != b:
            raise PrecisionError(f"floor undecided on interval [{float(self.lo)}, {float(self.hi)}]")
        return a

    def interval(self, bits: int = DEFAULT_BITS):
        return self.lo, self.hi

    def __repr__(self):
        return f"RationalInterval({self.lo}, {self.hi})"


def sign(x) -> int:
    """Certified sign of an exact number."""
    if isinstance(x, (QuadNumber, RationalInterval)):
        return x.sign()
    if isinstance(x, float):
        raise TypeError("floats have no certified sign here")
    return (x > 0) - (x < 0)


def certainly_equal(x, y) -> bool:
    """True only when ``x == y`` is provable; intervals never qualify."""
    if isinstance(x, RationalInterval) or isinstance(y, RationalInterval):
        return False
    return x == y


def to_float(x) -> float:
    return float(x)


def log(x) -> float:
    return math.log(float(x))


def parse_decimal_interval(text: str, digits: int) -> RationalInterval:
    """``text`` is a decimal literal whose true value is within ``10**-digits``."""
    centre = Fraction(text)
    half = Fraction(1, 10**digits)
    return RationalInterval(centre - half, centre + half)


GOLDEN = QuadNumber(Fraction(1, 2), Fraction(1, 2), 5)
