from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qstree.exact import DyadicPoint, Surd, format_dyadic, format_rational, parse_rational

coords = st.integers(min_value=-(1 << 20), max_value=1 << 20)
points = st.builds(DyadicPoint, coords, coords, st.integers(min_value=0, max_value=12))


def test_parse_forms():
    assert parse_rational("3/2^4") == Fraction(3, 16)
    assert parse_rational("-5/7") == Fraction(-5, 7)
    assert parse_rational(2) == 2
    assert format_dyadic(Fraction(3, 16)) == "3/2^4"
    assert format_rational(Fraction(1, 3)) == "1/3"


@given(st.fractions())
def test_format_roundtrip(x):
    assert parse_rational(format_rational(x)) == x


@given(points, points)
def test_dyadic_arithmetic_matches_fractions(p, q):
    s = p + q
    assert s.as_fractions() == (p.real + q.real, p.imag + q.imag)
    assert (p - q).norm_sq() == (p.real - q.real) ** 2 + (p.imag - q.imag) ** 2
    assert p.conj().imag == -p.imag


@given(points)
def test_dyadic_is_normalized(p):
    q = DyadicPoint.from_fractions(p.real, p.imag)
    assert q == p and hash(q) == hash(p)


@given(st.fractions(min_value=0, max_value=1000), st.fractions(min_value=0, max_value=1000))
def test_surd_order_matches_squares(a, b):
    assert (Surd(a) < Surd(b)) == (a < b)
    assert (Surd(a) == Surd(b)) == (a == b)


def test_surd_exact_root():
    assert Surd(Fraction(9, 4)).exact == Fraction(3, 2)
    assert Surd(2).exact is None
    assert Surd(72) / Surd(2) == Surd(36)
    with pytest.raises(ValueError):
        Surd(-1)
