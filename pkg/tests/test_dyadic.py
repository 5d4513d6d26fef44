import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fmmlab.dyadic import Dyadic, ONE, ZERO, parse_dyadic

mantissas = st.integers(min_value=-(2**80), max_value=2**80)
exponents = st.integers(min_value=-60, max_value=60)
dyadics = st.builds(Dyadic, mantissas, exponents)


def as_fraction(d):
    return d.to_fraction()


def test_normalize_examples():
    assert (Dyadic(4, -2).m, Dyadic(4, -2).e) == (1, 0)
    assert (Dyadic(0, 7).m, Dyadic(0, 7).e) == (0, 0)
    assert (Dyadic(6, -3).m, Dyadic(6, -3).e) == (3, -2)


def test_arith_examples():
    half = Dyadic(1, -1)
    assert half + half == ONE
    assert Dyadic(3).shift(-3) == parse_dyadic("3/8")
    assert parse_dyadic("3/8") * Dyadic(8) == Dyadic(3)


@given(dyadics)
def test_normalize_idempotent(d):
    again = Dyadic(d.m, d.e)
    assert (again.m, again.e) == (d.m, d.e)
    assert d.m == 0 and d.e == 0 or d.m % 2 == 1


@given(dyadics, dyadics)
def test_add_matches_fractions(a, b):
    assert as_fraction(a + b) == as_fraction(a) + as_fraction(b)
    assert as_fraction(a - b) == as_fraction(a) - as_fraction(b)


@given(dyadics, dyadics)
def test_mul_matches_fractions(a, b):
    assert as_fraction(a * b) == as_fraction(a) * as_fraction(b)


@given(dyadics, st.integers(min_value=-40, max_value=40))
def test_shift_matches_fractions(a, k):
    assert as_fraction(a.shift(k)) == as_fraction(a) * Fraction(2) ** k


@given(dyadics, dyadics)
def test_ordering_matches_fractions(a, b):
    assert (a < b) == (as_fraction(a) < as_fraction(b))
    assert (a == b) == (as_fraction(a) == as_fraction(b))


def test_int_interop():
    assert Dyadic(3) + 1 == 4
    assert 2 * Dyadic(1, -1) == ONE
    assert 1 - Dyadic(1, -1) == Dyadic(1, -1)
    assert hash(Dyadic(12)) == hash(12)
    assert hash(Dyadic(3, -1)) == hash(Fraction(3, 2))


def test_float_conversion_exact_small():
    assert Dyadic(3, -2).to_float() == 0.75
    assert Dyadic(-1, -3).to_float(strict=True) == -0.125
    assert float(ZERO) == 0.0


def test_float_conversion_reports_inexact():
    big = Dyadic(2**53 + 1)  # 54-bit mantissa
    with pytest.raises(ValueError):
        big.to_float(strict=True)
    assert big.to_float() in (float(2**53), float(2**53 + 2))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_from_float_round_trips(x):
    d = Dyadic.from_float(x)
    assert d.to_float(strict=True) == x
    assert as_fraction(d) == Fraction(x)


@given(dyadics)
def test_to_float_correctly_rounded(d):
    assert d.to_float() == float(as_fraction(d))


def test_from_float_rejects_non_finite():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            Dyadic.from_float(bad)


@given(dyadics)
def test_str_parse_round_trip(d):
    assert parse_dyadic(str(d)) == d


def test_parse_rejects_bad_tokens():
    for bad in ("1/3", "x", "3/0", "1/-2", "2/6"):
        with pytest.raises(ValueError):
            parse_dyadic(bad)


def test_exponent_overflow_is_hard_error():
    with pytest.raises(OverflowError):
        Dyadic(1, 2**40)
    with pytest.raises(OverflowError):
        Dyadic(1, 2**30 - 1) * Dyadic(1, 2**30 - 1)


def test_zero_identities():
    assert ZERO + ONE is ONE or ZERO + ONE == ONE
    assert ONE * ZERO == ZERO
    assert not ZERO
    assert abs(Dyadic(-5, -2)) == Dyadic(5, -2)
