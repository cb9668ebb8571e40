import math
import random
import struct
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from clarinet.posit import (
    CANONICAL_NAN32,
    Kind,
    PositBits,
    PositConfig,
    UnpackedPosit,
    binary32_from_posit,
    extract,
    normalize,
    posit_from_binary32,
    posit_from_float,
    posit_from_fraction,
    posit_to_fraction,
    round_to_binary32,
    value_as_rational,
)
from oracle import oracle_round, oracle_value, signed

P8 = PositConfig(8, 0)
P16 = PositConfig(16, 1)
P24 = PositConfig(24, 1)
P32 = PositConfig(32, 2)


def f32(x):
    return struct.unpack("<I", struct.pack("<f", x))[0]


def test_config_invariants():
    for cfg in (P8, P16, P24, P32):
        assert cfg.useed == 2 ** (2**cfg.es)
        assert cfg.max_scale == (cfg.n - 2) * 2**cfg.es
        assert cfg.quire_width == cfg.n**2 // 2
        assert cfg.quire_width >= 4 * cfg.max_scale + 1


@pytest.mark.parametrize("n,es", [(1, 0), (65, 0), (8, 5), (8, -1)])
def test_config_rejects_out_of_range(n, es):
    with pytest.raises(ValueError):
        PositConfig(n, es)


def test_pattern_must_fit():
    with pytest.raises(ValueError):
        PositBits(0x100, P8)


def test_extract_specials():
    assert extract(PositBits(0x00, P8)).kind is Kind.ZERO
    assert extract(PositBits(0x80, P8)).kind is Kind.NAR


@pytest.mark.parametrize(
    "pattern,sign,scale,frac",
    [(0x40, 0, 0, 0), (0x7F, 0, 6, 0), (0xC0, 1, 0, 0), (0x01, 0, -6, 0)],
)
def test_extract_examples(pattern, sign, scale, frac):
    u = extract(PositBits(pattern, P8))
    assert u.kind is Kind.REGULAR
    assert (u.sign, u.scale, u.frac) == (sign, scale, frac)
    assert value_as_rational(u) == oracle_value(pattern, 8, 0)


@pytest.mark.parametrize(
    "pattern,value", [(0x40, Fraction(1)), (0x01, Fraction(1, 64)), (0x62, Fraction(9, 4))]
)
def test_value_as_rational_examples(pattern, value):
    assert value_as_rational(extract(PositBits(pattern, P8))) == value


def test_value_as_rational_rejects_specials():
    with pytest.raises(ValueError):
        value_as_rational(UnpackedPosit.ZERO_VALUE)
    with pytest.raises(ValueError):
        value_as_rational(UnpackedPosit.NAR_VALUE)


def test_truncated_exponent_reads_zero():
    # posit<16,1>: 0x7FFE has regime 14 ones + terminator, no exponent bits
    u = extract(PositBits(0x7FFE, P16))
    assert u.scale == 13 * 2
    assert value_as_rational(u) == oracle_value(0x7FFE, 16, 1)


def test_normalize_examples():
    one = UnpackedPosit(Kind.REGULAR, 0, 0, 0, 0)
    assert normalize(one, P8).pattern == 0x40
    # 9.0 = 1.001b * 2**3: tie between 8 and 10, even pattern wins
    nine = UnpackedPosit(Kind.REGULAR, 0, 3, 0b001, 3)
    assert normalize(nine, P8).pattern == 0x78
    huge = UnpackedPosit(Kind.REGULAR, 0, 20, 0, 0)
    assert normalize(huge, P8).pattern == 0x7F
    assert normalize(UnpackedPosit(Kind.REGULAR, 1, 20, 0, 0), P8).pattern == 0x81


def test_normalize_saturates_small_values_to_minpos():
    tiny = UnpackedPosit(Kind.REGULAR, 0, -40, 5, 3)
    assert normalize(tiny, P8).pattern == 0x01
    assert normalize(UnpackedPosit(Kind.REGULAR, 1, -40, 0, 0), P8).pattern == 0xFF


def test_normalize_specials():
    assert normalize(UnpackedPosit.ZERO_VALUE, P8).pattern == 0
    assert normalize(UnpackedPosit.NAR_VALUE, P8).pattern == 0x80


@pytest.mark.parametrize("cfg", [P8, P16], ids=str)
def test_roundtrip_exhaustive(cfg):
    for p in range(1 << cfg.n):
        assert normalize(extract(PositBits(p, cfg)), cfg).pattern == p


@pytest.mark.parametrize("cfg", [P24, P32], ids=str)
def test_roundtrip_sampled(cfg):
    rng = random.Random(cfg.n)
    for _ in range(20000):
        p = rng.getrandbits(cfg.n)
        assert normalize(extract(PositBits(p, cfg)), cfg).pattern == p


@pytest.mark.parametrize("cfg", [P8, P16], ids=str)
def test_oracle_equivalence_and_monotonicity_exhaustive(cfg):
    n = cfg.n
    prev = None
    for sp in range(-(1 << (n - 1)) + 1, 1 << (n - 1)):
        p = sp & cfg.mask
        v = posit_to_fraction(p, cfg)
        assert v == oracle_value(p, n, cfg.es)
        if prev is not None:
            assert v > prev
        prev = v


@pytest.mark.parametrize("cfg", [P24, P32, PositConfig(12, 3)], ids=str)
def test_oracle_equivalence_sampled(cfg):
    rng = random.Random(7)
    for _ in range(3000):
        p = rng.getrandbits(cfg.n)
        if p == cfg.nar:
            continue
        assert posit_to_fraction(p, cfg) == oracle_value(p, cfg.n, cfg.es)


@pytest.mark.parametrize("cfg", [P16, P32], ids=str)
def test_monotone_sampled_pairs(cfg):
    rng = random.Random(3)
    for _ in range(3000):
        a, b = rng.getrandbits(cfg.n), rng.getrandbits(cfg.n)
        if cfg.nar in (a, b):
            continue
        sa, sb = signed(a, cfg.n), signed(b, cfg.n)
        va, vb = posit_to_fraction(a, cfg), posit_to_fraction(b, cfg)
        assert (sa < sb) == (va < vb)


def random_rational(rng, lo_exp, hi_exp):
    num = rng.getrandbits(rng.randint(1, 70)) or 1
    v = Fraction(num) * Fraction(2) ** rng.randint(lo_exp, hi_exp)
    if rng.random() < 0.3:
        v /= rng.randint(1, 1000)
    return -v if rng.random() < 0.5 else v


@pytest.mark.parametrize(
    "cfg", [P8, P16, P24, P32, PositConfig(16, 3), PositConfig(10, 4)], ids=str
)
def test_rne_matches_oracle(cfg):
    rng = random.Random(cfg.n * 10 + cfg.es)
    span = cfg.max_scale + 8
    for _ in range(1500):
        v = random_rational(rng, -span - 60, span)
        assert posit_from_fraction(v, cfg) == oracle_round(v, cfg.n, cfg.es), v


def test_rne_midpoints_between_neighbours():
    # every midpoint between adjacent posit<8,0> values rounds to the even one
    for p in range(1, 0x7F):
        lo, hi = posit_to_fraction(p, P8), posit_to_fraction(p + 1, P8)
        mid = (lo + hi) / 2
        want = p if p % 2 == 0 else p + 1
        assert posit_from_fraction(mid, P8) == want


def test_rne_truncated_exponent_region():
    # posit<16,3>: near maxpos the exponent field is cut; rounding is by value
    cfg = PositConfig(16, 3)
    for p in range(0x7FF0, 0x7FFF):
        lo, hi = posit_to_fraction(p, cfg), posit_to_fraction(p + 1, cfg)
        for t in (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)):
            v = lo + (hi - lo) * t
            assert posit_from_fraction(v, cfg) == oracle_round(v, 16, 3)


@given(st.integers(min_value=1, max_value=0xFF).filter(lambda p: p != 0x80))
def test_rounding_never_yields_zero_or_nar(p):
    v = posit_to_fraction(p, P8)
    for scale in (Fraction(1, 10**6), Fraction(10**6)):
        r = posit_from_fraction(v * scale, P8)
        assert r not in (0, 0x80)


# -- binary32 ---------------------------------------------------------------


def test_binary32_examples():
    assert posit_from_binary32(f32(1.5), P8).pattern == 0x50
    assert posit_from_binary32(f32(1.5), P16).pattern == 0x4800
    assert posit_from_binary32(0x7F800000, P8).pattern == 0x80
    assert posit_from_binary32(0xFF800000, P8).pattern == 0x80
    assert posit_from_binary32(0x7FC00001, P8).pattern == 0x80
    assert posit_from_binary32(0x80000000, P8).pattern == 0
    assert binary32_from_posit(PositBits(0x7F, P8)) == f32(64.0)
    assert binary32_from_posit(PositBits(0, P8)) == 0
    assert binary32_from_posit(PositBits(0x80, P8)) == CANONICAL_NAN32


def test_binary32_subnormal_input():
    w = 0x00000001  # 2**-149
    assert posit_from_binary32(w, P32).pattern == 1  # below minpos: saturate
    w = 0x00400000  # 2**-127
    assert posit_from_binary32(w, P32).pattern == posit_from_fraction(
        Fraction(1, 2**127), P32
    )


@pytest.mark.parametrize("cfg", [P8, P16], ids=str)
def test_posit_binary32_roundtrip_exhaustive(cfg):
    for p in range(1 << cfg.n):
        if p == cfg.nar:
            continue
        w = binary32_from_posit(PositBits(p, cfg))
        assert posit_from_binary32(w, cfg).pattern == p


def test_posit_binary32_roundtrip_sampled_p24():
    rng = random.Random(11)
    for _ in range(20000):
        p = rng.getrandbits(24)
        if p == P24.nar:
            continue
        w = binary32_from_posit(PositBits(p, P24))
        assert posit_from_binary32(w, P24).pattern == p
        x = struct.unpack("<f", struct.pack("<I", w))[0]
        assert Fraction(x) == posit_to_fraction(p, P24)


def test_posit32_to_binary32_rounds_to_nearest():
    # posit<32,2> carries up to 27 fraction bits, so the cast can be inexact
    rng = random.Random(12)
    inexact = 0
    for _ in range(20000):
        p = rng.getrandbits(32)
        if p == P32.nar:
            continue
        w = binary32_from_posit(PositBits(p, P32))
        exact = posit_to_fraction(p, P32)
        assert w == f32(float(exact)) or abs(float(exact)) < 2**-126
        inexact += Fraction(struct.unpack("<f", struct.pack("<I", w))[0]) != exact
    assert inexact > 0


@given(st.floats(width=32, allow_nan=False, allow_infinity=False))
def test_binary32_to_posit_to_binary32_identity_when_representable(x):
    w = f32(x)
    p = posit_from_binary32(w, P32)
    if posit_to_fraction(p.pattern, P32) == Fraction(x):
        back = binary32_from_posit(p)
        assert back == w or (x == 0 and back == 0)


@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_round_to_binary32_matches_hardware_cast(x):
    if abs(x) > 3.4e38:
        return
    m, e = math.frexp(abs(x))
    mant = int(m * 2**53)
    w = round_to_binary32(1 if math.copysign(1, x) < 0 else 0, mant, e - 53)
    assert w == f32(x)


def test_posit_from_float_matches_fraction_rounding():
    rng = random.Random(5)
    for _ in range(2000):
        x = rng.uniform(-1e6, 1e6) * 10 ** rng.randint(-30, 3)
        for cfg in (P8, P16, P32):
            assert posit_from_float(x, cfg) == posit_from_fraction(Fraction(x), cfg)
