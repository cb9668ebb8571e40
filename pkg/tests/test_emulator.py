import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clarinet import f32
from clarinet.asm import assemble
from clarinet.emulator import Category, Machine, category_of
from clarinet.numerics.programs import POSIT_DOT, dot_listing, native_dot, run_dot
from clarinet.posit import config_for, posit_from_float

P8 = config_for(8, 0)


def run(src, cfg=None, **kw):
    m = Machine(cfg, **kw)
    m.load_program(assemble(src))
    res = m.run(100_000)
    return m, res


def test_addi_then_read():
    m, res = run("addi x1, x0, 5\nhalt")
    assert res.ok and m.x[1] == 5


def test_x0_stays_zero():
    m, _ = run("addi x0, x0, 7\nlui x0, 1\nhalt")
    assert m.x[0] == 0


@given(st.integers(-(2**31), 2**31 - 1), st.integers(-(2**31), 2**31 - 1))
@settings(max_examples=60)
def test_integer_alu_and_m_extension(a, b):
    m, res = run(
        f"li a0, {a}\nli a1, {b}\n"
        "add t0, a0, a1\nsub t1, a0, a1\nmul t2, a0, a1\nmulh t3, a0, a1\n"
        "div t4, a0, a1\nrem t5, a0, a1\nslt t6, a0, a1\nhalt"
    )
    assert res.ok
    M = 0xFFFFFFFF
    assert m.x[5] == (a + b) & M
    assert m.x[6] == (a - b) & M
    assert m.x[7] == (a * b) & M
    assert m.x[28] == ((a * b) >> 32) & M
    if b == 0:
        assert m.x[29] == M and m.x[30] == a & M
    elif a == -(2**31) and b == -1:
        assert m.x[29] == a & M and m.x[30] == 0
    else:
        q = abs(a) // abs(b) * (1 if (a < 0) == (b < 0) else -1)
        assert m.x[29] == q & M and m.x[30] == (a - q * b) & M
    assert m.x[31] == int(a < b)


def test_loads_stores_sign_extension():
    m, res = run(
        "li a0, 0x1000\nli t0, -2\nsw t0, 0(a0)\n"
        "lb t1, 0(a0)\nlbu t2, 0(a0)\nlh t3, 0(a0)\nlhu t4, 0(a0)\nhalt"
    )
    assert res.ok
    assert m.x[6] == 0xFFFFFFFE and m.x[7] == 0xFE
    assert m.x[28] == 0xFFFFFFFE and m.x[29] == 0xFFFE


def test_branch_loop_counts():
    m, res = run("li t0, 10\nli t1, 0\nloop: addi t1, t1, 3\naddi t0, t0, -1\nbnez t0, loop\nhalt")
    assert res.ok and m.x[6] == 30


def test_jump_to_self_halts():
    m, res = run("addi x1, x0, 1\nend: j end")
    assert res.ok and res.halted and m.retired == 2


def test_call_and_ret():
    m, res = run("call f\naddi a1, a0, 1\nhalt\nf: li a0, 41\nret")
    assert res.ok and m.x[11] == 42


def test_float_ops_match_scalar_helpers():
    m = Machine()
    m.load_program(assemble(
        "li a0, 0x1000\nflw f1, 0(a0)\nflw f2, 4(a0)\n"
        "fadd.s f3, f1, f2\nfmul.s f4, f1, f2\nfdiv.s f5, f1, f2\n"
        "fmadd.s f6, f1, f2, f1\nfsqrt.s f7, f2\nfcvt.w.s t0, f5\nhalt"
    ))
    a, b = f32.from_float(1.1), f32.from_float(3.7)
    m.write_words(0x1000, [a, b])
    assert m.run().ok
    assert m.f[3] == f32.add(a, b)
    assert m.f[4] == f32.mul(a, b)
    assert m.f[5] == f32.div(a, b)
    assert m.f[6] == f32.fma(a, b, a)
    assert m.f[7] == f32.sqrt(b)
    assert m.x[5] == 0


def test_fmadd_occupancy_and_category():
    m, res = run("fmadd.s f1, f2, f3, f4\nhalt")
    assert category_of("fmadd.s") is Category.FLOAT_COMPUTE
    assert m.ledger[Category.FLOAT_COMPUTE] == 12


def test_dependent_fp_op_stalls_for_latency():
    m, _ = run("fadd.s f1, f2, f3\nfadd.s f4, f1, f1\nhalt")
    # second add issues at 14 (result latency), then occupies 12
    assert m.ledger["float compute"] == 14 + 12


def test_posit_dot_listing_leaves_two():
    a = [posit_from_float(1.0, P8)] * 2
    m = Machine(P8)
    prog = assemble("li a0, 0x1000\nli a1, 0x2000\nli a2, 2\n" + POSIT_DOT.format(w=1).replace("psw      p3, 0(a3)\n", ""))
    m.load_program(prog)
    m.write_posits(0x1000, a)
    m.write_posits(0x2000, a)
    assert m.run().ok
    assert m.p[3] == posit_from_float(2.0, P8)


def test_integer_only_loop_is_all_others():
    m, _ = run("li t0, 5\nloop: addi t0, t0, -1\nbnez t0, loop\nhalt")
    d = m.ledger.as_dict()
    assert d["others"] == m.cycles
    assert all(v == 0 for k, v in d.items() if k != "others")


def test_integer_loads_feeding_pmv_count_as_posit_ldst():
    a, b = np.full(8, 0.5), np.full(8, 2.0)
    _, m, res = run_dot("p-int", a, b, config_for(16))
    assert res.ok
    d = m.ledger.as_dict()
    # 16 lhu loads at 2 cycles plus the final sh store
    assert d["posit ld/st"] == 16 * 2 + 2
    loads = [t for t in m.trace if t.text.startswith("lhu")]
    assert loads and all(t.category is Category.POSIT_LDST for t in loads)


def test_load_not_feeding_pmv_stays_other():
    m, _ = run("li a0, 0x100\nlw t0, 0(a0)\naddi t1, t0, 1\nhalt")
    assert m.ledger["posit ld/st"] == 0


def test_pmv_roundtrip_and_converters():
    cfg = config_for(32)
    m = Machine(cfg)
    m.load_program(assemble(
        "li t0, 0x40000000\npmv.w.x p1, t0\nfcvt.s.p f1, p1\nfcvt.p.s p2, f1\npmv.x.w t1, p2\nhalt"
    ))
    assert m.run().ok
    assert m.x[6] == 0x40000000
    assert m.f[1] == f32.from_float(1.0)
    assert m.ledger["float-posit interop"] > 0


@pytest.mark.parametrize("variant", ["f32", "f32-p", "p", "p-int"])
@pytest.mark.parametrize("n", [8, 16, 24, 32])
def test_dot_programs_match_native(variant, n):
    rng = np.random.default_rng(n)
    a, b = rng.uniform(-3, 3, 40), rng.uniform(-3, 3, 40)
    value, _, res = run_dot(variant, a, b, config_for(n))
    assert res.ok
    assert value == native_dot(variant, a, b, config_for(n))


def test_determinism():
    rng = np.random.default_rng(1)
    a, b = rng.uniform(0, 1, 30), rng.uniform(0, 1, 30)
    _, m1, _ = run_dot("f32-p", a, b)
    _, m2, _ = run_dot("f32-p", a, b)
    assert m1.cycles == m2.cycles
    assert m1.ledger.as_dict() == m2.ledger.as_dict()
    assert m1.trace_text() == m2.trace_text()
    assert m1.mem == m2.mem


def test_timing_off_keeps_results():
    rng = np.random.default_rng(2)
    a, b = rng.uniform(0, 1, 20), rng.uniform(0, 1, 20)
    v1, m1, _ = run_dot("p", a, b)
    v2, m2, _ = run_dot("p", a, b, timing=False)
    assert v1 == v2 and m2.cycles == m2.retired < m1.cycles


def test_illegal_instruction_traps():
    m, res = run(".word 0xffffffff")
    assert not res.ok and res.trap.kind == "illegal-instruction" and res.trap.pc == 0


def test_misaligned_and_out_of_range_access_trap():
    _, res = run("li a0, 2\nlw t0, 0(a0)\nhalt")
    assert res.trap.kind == "misaligned"
    _, res = run("li a0, 0x7ffffff0\nlw t0, 0(a0)\nhalt")
    assert res.trap.kind == "access-fault"


def test_budget_exhaustion_is_not_halt():
    m, res = run("loop: addi t0, t0, 1\nj loop")
    assert not res.halted and res.trap is None and m.retired == 100_000


def test_cycle_csr():
    m, res = run("addi t0, x0, 1\nrdcycle t1\nhalt")
    assert res.ok and m.x[6] == 1


def test_posit_compute_is_cheaper_than_float_compute_for_long_dots():
    rng = np.random.default_rng(3)
    a, b = rng.uniform(0, 1, 256), rng.uniform(0, 1, 256)
    _, mf, _ = run_dot("f32", a, b)
    _, mp, _ = run_dot("p", a, b, P8)
    assert mp.ledger["posit compute"] < mf.ledger["float compute"]


def test_listing_uses_storage_stride():
    assert "addi     a0, a0, 1" in dot_listing("p", P8)
    assert "lbu" in dot_listing("p-int", P8)
    assert "lw" in dot_listing("p-int", config_for(24))
