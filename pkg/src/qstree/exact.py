"""Exact arithmetic helpers: square roots of rationals, Gaussian dyadics, rational I/O."""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]

_DYADIC_RE = re.compile(r"^\s*(-?\d+)\s*/\s*2\^(\d+)\s*$")


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"``, ``"a/2^k"``, an integer or a decimal string into a Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    s = text.strip().replace("−", "-")
    m = _DYADIC_RE.match(s)
    if m:
        return Fraction(int(m.group(1)), 1 << int(m.group(2)))
    return Fraction(s)


def format_rational(x: Rational) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def format_dyadic(x: Rational) -> str:
    """Format a dyadic rational as ``"a/2^k"`` (plain integer when k = 0)."""
    x = Fraction(x)
    d = x.denominator
    if d & (d - 1):
        raise ValueError(f"{x} is not dyadic")
    if d == 1:
        return str(x.numerator)
    return f"{x.numerator}/2^{d.bit_length() - 1}"


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


class Surd:
    """Non-negative real ``sqrt(sq)`` with ``sq`` rational.

    Distances in the Euclidean-embedded mode are square roots of rationals;
    ratios and products of such numbers stay in this class, so comparisons
    never leave exact arithmetic.
    """

    __slots__ = ("sq",)

    def __init__(self, sq: Rational):
        sq = Fraction(sq)
        if sq < 0:
            raise ValueError("Surd needs a non-negative square")
        self.sq = sq

    @classmethod
    def of(cls, x: Rational) -> Surd:
        x = Fraction(x)
        if x < 0:
            raise ValueError("Surd.of needs a non-negative value")
        return cls(x * x)

    @property
    def exact(self) -> Fraction | None:
        n, d = self.sq.numerator, self.sq.denominator
        if _is_square(n) and _is_square(d):
            return Fraction(math.isqrt(n), math.isqrt(d))
        return None

    def _coerce(self, other) -> Surd:
        if isinstance(other, Surd):
            return other
        if isinstance(other, (int, Fraction)):
            return Surd.of(other)
        return NotImplemented

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Surd(self.sq * o.sq)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.sq == 0:
            raise ZeroDivisionError("division by zero distance")
        return Surd(self.sq / o.sq)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.sq == o.sq

    def __hash__(self):
        return hash(("surd", self.sq))

    def __lt__(self, other):
        return self.sq < self._coerce(other).sq

    def __le__(self, other):
        return self.sq <= self._coerce(other).sq

    def __gt__(self, other):
        return self.sq > self._coerce(other).sq

    def __ge__(self, other):
        return self.sq >= self._coerce(other).sq

    def __float__(self):
        return math.sqrt(float(self.sq))

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        e = self.exact
        if e is not None:
            return format_rational(e)
        return f"sqrt({format_rational(self.sq)})"

    def to_json(self) -> dict:
        out = {"decimal": f"{float(self):.12g}", "square": format_rational(self.sq)}
        e = self.exact
        if e is not None:
            out["exact"] = format_rational(e)
        return out


class DyadicPoint:
    """The Gaussian dyadic ``(a + b i) / 2^k`` kept in canonical form."""

    __slots__ = ("a", "b", "k")

    def __init__(self, a: int, b: int = 0, k: int = 0):
        if k < 0:
            a, b, k = a << -k, b << -k, 0
        while k > 0 and not (a & 1) and not (b & 1):
            a >>= 1
            b >>= 1
            k -= 1
        self.a, self.b, self.k = a, b, k

    @classmethod
    def from_fractions(cls, re_: Rational, im: Rational) -> DyadicPoint:
        re_, im = Fraction(re_), Fraction(im)
        d = max(re_.denominator, im.denominator)
        k = d.bit_length() - 1
        if (1 << k) != d or re_.denominator & (re_.denominator - 1) or im.denominator & (im.denominator - 1):
            raise ValueError("coordinates are not dyadic")
        return cls(int(re_ * d), int(im * d), k)

    @property
    def real(self) -> Fraction:
        return Fraction(self.a, 1 << self.k)

    @property
    def imag(self) -> Fraction:
        return Fraction(self.b, 1 << self.k)

    def as_fractions(self) -> tuple[Fraction, Fraction]:
        return self.real, self.imag

    def scaled(self, k: int) -> tuple[int, int]:
        """Integer coordinates at scale ``2^k`` (``k`` must be at least ``self.k``)."""
        s = k - self.k
        if s < 0:
            raise ValueError("scale too coarse for this point")
        return self.a << s, self.b << s

    def __add__(self, other: DyadicPoint) -> DyadicPoint:
        k = max(self.k, other.k)
        a1, b1 = self.scaled(k)
        a2, b2 = other.scaled(k)
        return DyadicPoint(a1 + a2, b1 + b2, k)

    def __sub__(self, other: DyadicPoint) -> DyadicPoint:
        k = max(self.k, other.k)
        a1, b1 = self.scaled(k)
        a2, b2 = other.scaled(k)
        return DyadicPoint(a1 - a2, b1 - b2, k)

    def conj(self) -> DyadicPoint:
        return DyadicPoint(self.a, -self.b, self.k)

    def norm_sq(self) -> Fraction:
        return Fraction(self.a * self.a + self.b * self.b, 1 << (2 * self.k))

    def __eq__(self, other):
        if not isinstance(other, DyadicPoint):
            return NotImplemented
        return self.a == other.a and self.b == other.b and self.k == other.k

    def __hash__(self):
        return hash((self.a, self.b, self.k))

    def __lt__(self, other: DyadicPoint):
        return (self.real, self.imag) < (other.real, other.imag)

    def __repr__(self):
        return f"DyadicPoint({self})"

    def __str__(self):
        re_, im = self.as_fractions()
        if im == 0:
            return format_rational(re_)
        if re_ == 0:
            return f"{format_rational(im)}i"
        sign = "+" if im > 0 else "-"
        return f"{format_rational(re_)}{sign}{format_rational(abs(im))}i"

    def to_json(self) -> list[str]:
        return [format_rational(self.real), format_rational(self.imag)]

    def __complex__(self):
        return complex(float(self.real), float(self.imag))


ZERO = DyadicPoint(0, 0, 0)
ONE = DyadicPoint(1, 0, 0)
MINUS_ONE = DyadicPoint(-1, 0, 0)
I_UNIT = DyadicPoint(0, 1, 0)
