"""Scalar binary32 helpers against numpy float32 and exact rationals."""

import math
from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from clarinet import f32
from clarinet.posit import CANONICAL_NAN32

words = st.integers(0, 2**32 - 1)
finite_words = words.filter(lambda w: (w & 0x7F800000) != 0x7F800000)


def np32(w):
    return np.array([w], dtype=np.uint32).view(np.float32)[0]


def bits(x):
    return int(np.array([x], dtype=np.float32).view(np.uint32)[0])


def canon(w):
    return CANONICAL_NAN32 if f32.is_nan(w) else w


@given(words, words)
def test_basic_ops_match_numpy(a, b):
    with np.errstate(all="ignore"):
        x, y = np32(a), np32(b)
        assert f32.add(a, b) == canon(bits(x + y))
        assert f32.sub(a, b) == canon(bits(x - y))
        assert f32.mul(a, b) == canon(bits(x * y))
        assert f32.div(a, b) == canon(bits(x / y))


@given(words)
def test_sqrt_matches_numpy(a):
    with np.errstate(all="ignore"):
        assert f32.sqrt(a) == canon(bits(np.sqrt(np32(a))))


def _exact(w):
    return Fraction(f32.to_float(w))


@given(finite_words, finite_words, finite_words)
def test_fma_rounds_once(a, b, c):
    got = f32.fma(a, b, c)
    v = _exact(a) * _exact(b) + _exact(c)
    if v == 0:
        assert f32.to_float(got) == 0.0
        return
    r = f32.to_float(got)
    if math.isinf(r):
        assert abs(v) >= Fraction(2) ** 128 - Fraction(2) ** 103
        return
    # no binary32 neighbour of the result is closer to the exact value
    for nb in (got - 1, got + 1):
        if (nb & 0x7F800000) != 0x7F800000 and (nb ^ got) >> 31 == 0:
            assert abs(Fraction(r) - v) <= abs(_exact(nb) - v)


def test_fma_single_rounding_beats_two_step():
    # (1 + 2^-12)^2 - 1: a separate multiply rounds away the 2^-24 term
    a = f32.from_float(1 + 2**-12)
    c = f32.from_float(-1.0)
    assert f32.to_float(f32.fma(a, a, c)) == 2**-11 + 2**-24
    assert f32.to_float(f32.add(f32.mul(a, a), c)) == 2**-11


def test_fma_negations_and_signed_zero():
    one, two = f32.from_float(1.0), f32.from_float(2.0)
    assert f32.to_float(f32.fma(one, two, one, negate_product=True)) == -1.0
    assert f32.to_float(f32.fma(one, two, one, negate_addend=True)) == 1.0
    nz = f32.from_float(-0.0)
    assert f32.fma(nz, one, nz) == 0x80000000
    assert f32.fma(0, one, nz) == 0


def test_min_max_nan_and_zero_rules():
    nan = 0x7FC00001
    one = f32.from_float(1.0)
    assert f32.fmin(nan, one) == one and f32.fmax(one, nan) == one
    assert f32.fmin(nan, nan) == CANONICAL_NAN32
    assert f32.fmin(0, 0x80000000) == 0x80000000
    assert f32.fmax(0, 0x80000000) == 0


def test_int_conversions_saturate_and_round_even():
    assert f32.to_int32(f32.from_float(2.5)) == 2
    assert f32.to_int32(f32.from_float(3.5)) == 4
    assert f32.to_int32(f32.from_float(-1.5)) == (-2) & 0xFFFFFFFF
    assert f32.to_int32(f32.from_float(1e20)) == 0x7FFFFFFF
    assert f32.to_int32(f32.from_float(-1e20)) == 0x80000000
    assert f32.to_int32(0x7FC00000) == 0x7FFFFFFF
    assert f32.to_int32(f32.from_float(-3.0), unsigned=True) == 0
    assert f32.from_int32(0xFFFFFFFF) == f32.from_float(-1.0)
    assert f32.from_int32(0xFFFFFFFF, unsigned=True) == f32.from_float(4294967296.0)
    assert f32.from_int32(16777217) == f32.from_float(16777216.0)


def test_overflow_becomes_infinity():
    assert f32.from_float(1e300) == 0x7F800000
    assert f32.from_float(-1e300) == 0xFF800000
    assert f32.from_float(float("nan")) == CANONICAL_NAN32
