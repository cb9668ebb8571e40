import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from clarinet.posit import Kind, PositBits, PositConfig, extract, posit_to_fraction
from clarinet.quire import QUOTIENT_EXTRA, FusedOp, Quire, quotient
from oracle import oracle_round, oracle_value

P8 = PositConfig(8, 0)
P16 = PositConfig(16, 1)
P32 = PositConfig(32, 2)


def up(p, cfg=P8):
    return extract(PositBits(p, cfg))


def naive_lzc(q):
    v = q.to_int()
    mag = -v if v < 0 else v
    return q.width - mag.bit_length()


def check_flags(q):
    assert q.seg_zero == [s == 0 for s in q.segments]


def test_layout():
    for cfg, nseg, guard in ((P8, 1, 7), (P16, 4, 15), (P32, 16, 31)):
        q = Quire(cfg)
        assert q.width == cfg.n**2 // 2
        assert q.nsegments == nseg
        assert q.guard_bits == guard
        assert q.frac_bits == 2 * (cfg.n - 2) * 2**cfg.es


def test_init_examples():
    q = Quire(P8).init(PositBits(0, P8))
    assert q.segments == [0] and q.seg_zero == [True]
    q = Quire(P8).init(PositBits(0x40, P8))
    assert q.to_int() == 1 << 12
    assert q.leading_zero_count() == 19
    q = Quire(P8).init(PositBits(0x80, P8))
    assert q.is_nar
    assert q.read().kind is Kind.NAR


def test_init_rejects_config_mismatch():
    with pytest.raises(ValueError):
        Quire(P8).init(PositBits(0x4000, P16))


def test_too_narrow_quire_rejected():
    with pytest.raises(ValueError):
        Quire(PositConfig(24, 2))


def test_accumulate_examples():
    q = Quire(P8)
    q.accumulate(up(0x50), up(0x50), FusedOp.MUL_ADD)
    assert q.read_bits().pattern == 0x62
    for _ in range(3):
        q.accumulate(up(0x50), up(0x50), FusedOp.MUL_ADD)
    assert q.to_int() == 9 << 12
    assert q.read_bits().pattern == 0x78


def test_maxpos_squared_is_held_exactly():
    q = Quire(P8)
    q.accumulate(up(0x7F), up(0x7F), FusedOp.MUL_ADD)
    assert q.to_int() == 4096 << 12
    assert q.read_bits().pattern == 0x7F


def test_minpos_squared_is_held_exactly():
    for cfg in (P8, P16, P32):
        q = Quire(cfg)
        q.accumulate(up(1, cfg), up(1, cfg), FusedOp.MUL_ADD)
        assert q.to_int() == 1
        assert q.read_bits().pattern == 1


def test_zero_operand_leaves_quire_unchanged():
    q = Quire(P8).init(PositBits(0x62, P8))
    before = list(q.segments)
    q.accumulate(up(0x55), up(0), FusedOp.MUL_ADD)
    q.accumulate(up(0), up(0x55), FusedOp.DIV_SUB)
    assert q.segments == before


def test_nar_is_sticky():
    q = Quire(P8)
    q.accumulate(up(0x80), up(0x40), FusedOp.MUL_ADD)
    assert q.is_nar
    q.accumulate(up(0x40), up(0x40), FusedOp.MUL_ADD)
    assert q.read().kind is Kind.NAR
    q.init(PositBits(0, P8))
    assert not q.is_nar
    q.accumulate(up(0x40), up(0), FusedOp.DIV_ADD)
    assert q.is_nar


def test_negative_read_and_cancellation():
    q = Quire(P8)
    q.accumulate(up(0x50), up(0x50), FusedOp.MUL_SUB)
    assert q.read_bits().pattern == (-0x62) & 0xFF
    q.accumulate(up(0x50), up(0x50), FusedOp.MUL_ADD)
    assert q.read().kind is Kind.ZERO
    assert all(q.seg_zero)


def test_division_rounds_quotient_at_2n_bits():
    q = Quire(P16)
    one = PositBits(0x4000, P16)
    three = 0x5800  # 3.0 in posit<16,1>
    assert posit_to_fraction(three, P16) == 3
    q.accumulate(extract(one), up(three, P16), FusedOp.DIV_ADD)
    qv, e = quotient(1, 0, 3, 0, QUOTIENT_EXTRA * 16)
    assert qv.bit_length() == 32
    assert abs(Fraction(qv) * Fraction(2) ** e - Fraction(1, 3)) <= Fraction(2) ** (e - 1)
    assert Fraction(q.to_int(), 2**q.frac_bits) == Fraction(qv) * Fraction(2) ** e
    assert q.read_bits().pattern == oracle_round(Fraction(1, 3), 16, 1)


def test_quotient_is_round_nearest_even():
    rng = random.Random(1)
    for _ in range(2000):
        a = rng.getrandbits(20) | 1
        b = rng.getrandbits(20) | 1
        bits = rng.randint(4, 40)
        qv, e = quotient(a, 0, b, 0, bits)
        assert qv.bit_length() == bits
        exact = Fraction(a, b)
        approx = Fraction(qv) * Fraction(2) ** e
        ulp = Fraction(2) ** e
        assert abs(approx - exact) <= ulp / 2
        if abs(approx - exact) == ulp / 2:
            assert qv % 2 == 0


def random_regular(rng, cfg):
    while True:
        p = rng.getrandbits(cfg.n)
        if p not in (0, cfg.nar):
            return p


@pytest.mark.parametrize("cfg", [P8, P16], ids=str)
def test_single_rounding_against_rational_oracle(cfg):
    rng = random.Random(cfg.n)
    for trial in range(300):
        q = Quire(cfg)
        exact = Fraction(0)
        for _ in range(rng.randint(1, 64)):
            a, b = random_regular(rng, cfg), random_regular(rng, cfg)
            op = FusedOp.MUL_SUB if rng.random() < 0.3 else FusedOp.MUL_ADD
            q.accumulate(up(a, cfg), up(b, cfg), op)
            prod = oracle_value(a, cfg.n, cfg.es) * oracle_value(b, cfg.n, cfg.es)
            exact += -prod if op is FusedOp.MUL_SUB else prod
            check_flags(q)
        assert Fraction(q.to_int(), 2**q.frac_bits) == exact
        assert q.read_bits().pattern == oracle_round(exact, cfg.n, cfg.es)


@given(
    st.lists(
        st.tuples(st.integers(1, 0xFF), st.integers(1, 0xFF)).filter(
            lambda t: 0x80 not in t
        ),
        min_size=1,
        max_size=40,
    )
)
def test_sign_symmetry(pairs):
    qa, qb = Quire(P8), Quire(P8)
    for a, b in pairs:
        qa.accumulate(up((-a) & 0xFF), up(b), FusedOp.MUL_ADD)
        qb.accumulate(up(a), up(b), FusedOp.MUL_SUB)
    assert qa.segments == qb.segments and qa.seg_zero == qb.seg_zero


@pytest.mark.parametrize("cfg", [P8, P16, P32], ids=str)
def test_lzc_matches_naive_scan(cfg):
    rng = random.Random(2)
    for _ in range(300):
        q = Quire(cfg)
        for _ in range(rng.randint(0, 5)):
            op = rng.choice(list(FusedOp))
            q.accumulate(
                up(random_regular(rng, cfg), cfg), up(random_regular(rng, cfg), cfg), op
            )
        check_flags(q)
        assert q.leading_zero_count() == naive_lzc(q)
    assert Quire(cfg).leading_zero_count() == cfg.quire_width


def test_segment_size_is_a_parameter():
    rng = random.Random(4)
    for bits in (8, 16, 32, 64):
        q, ref = Quire(P16, segment_bits=bits), Quire(P16)
        for _ in range(50):
            a, b = up(random_regular(rng, P16), P16), up(random_regular(rng, P16), P16)
            q.accumulate(a, b, FusedOp.MUL_ADD)
            ref.accumulate(a, b, FusedOp.MUL_ADD)
        assert q.to_int() == ref.to_int()
        assert q.leading_zero_count() == ref.leading_zero_count()
        assert q.read_bits() == ref.read_bits()


def test_guard_bits_absorb_long_maxpos_chains():
    # 2**(guard-1) copies of maxpos**2 still fit without wrapping
    q = Quire(P8)
    m = up(0x7F)
    for _ in range(2 ** (q.guard_bits - 1) - 1):
        q.accumulate(m, m, FusedOp.MUL_ADD)
    assert q.to_int() == (2 ** (q.guard_bits - 1) - 1) * (4096 << 12)
    assert q.to_int() > 0


def test_dump_format():
    q = Quire(P16).init(PositBits(0x4000, P16))
    assert q.dump() == "00000000 00000000 01000000 00000000 | z=1101"
    q.is_nar = True
    assert q.dump().startswith("NaR ")
