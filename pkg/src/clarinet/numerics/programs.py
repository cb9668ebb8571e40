"""Dot-product programs for the emulator, and helpers to run them.

Four variants of ``result = sum(a[i] * b[i])``:

``f32``      binary32 data, ``fmadd.s`` accumulation chain
``f32-p``    binary32 data converted per element (``fcvt.p.s``) and
             accumulated in the quire; the result is converted back
``p``        posit data loaded straight into the PRF (``plw``)
``p-int``    posit data loaded through integer loads (``lbu``/``lhu``/``lw``)
             and moved into the PRF with ``pmv.w.x``, as compiled C code
             without posit type support has to do

Register conventions: a0 = &a, a1 = &b, a2 = length, a3 = &result.
"""

from __future__ import annotations

import numpy as np

from ..asm import assemble
from ..emulator import Machine
from ..posit import PositConfig, config_for
from .vec import posit_round, posit_value

__all__ = ["VARIANTS", "dot_listing", "run_dot", "native_dot"]

VARIANTS = ("f32", "f32-p", "p", "p-int")

A_ADDR, B_ADDR, OUT_ADDR = 0x10000, 0x50000, 0x90000

_INT_LOAD = {1: "lbu", 2: "lhu", 4: "lw"}
_INT_STORE = {1: "sb", 2: "sh", 4: "sw"}

F32_DOT = """\
# binary32 dot product
        fmv.w.x  f0, x0             # acc = 0.0
loop:   flw      f1, 0(a0)
        flw      f2, 0(a1)
        fmadd.s  f0, f1, f2, f0
        addi     a0, a0, 4
        addi     a1, a1, 4
        addi     a2, a2, -1
        bnez     a2, loop
        fsw      f0, 0(a3)
        halt
"""

F32_POSIT_DOT = """\
# binary32 data, quire accumulation: two conversions per element
        fcvt.r.p p0                 # p0 = 0: clear the quire
loop:   flw      f1, 0(a0)
        flw      f2, 0(a1)
        fcvt.p.s p1, f1
        fcvt.p.s p2, f2
        fma.p    p1, p2
        addi     a0, a0, 4
        addi     a1, a1, 4
        addi     a2, a2, -1
        bnez     a2, loop
        fcvt.p.r p3
        fcvt.s.p f3, p3
        fsw      f3, 0(a3)
        halt
"""

POSIT_DOT = """\
# posit data, quire accumulation
        fcvt.r.p p0                 # p0 = 0: clear the quire
loop:   plw      p1, 0(a0)
        plw      p2, 0(a1)
        fma.p    p1, p2
        addi     a0, a0, {w}
        addi     a1, a1, {w}
        addi     a2, a2, -1
        bnez     a2, loop
        fcvt.p.r p3
        psw      p3, 0(a3)
        halt
"""

POSIT_INT_DOT = """\
# posit data through integer loads and pmv
        fcvt.r.p p0                 # p0 = 0: clear the quire
loop:   {ld}      t0, 0(a0)
        {ld}      t1, 0(a1)
        pmv.w.x  p1, t0
        pmv.w.x  p2, t1
        fma.p    p1, p2
        addi     a0, a0, {w}
        addi     a1, a1, {w}
        addi     a2, a2, -1
        bnez     a2, loop
        fcvt.p.r p3
        pmv.x.w  t2, p3
        {st}      t2, 0(a3)
        halt
"""


def dot_listing(variant: str, config: PositConfig | None = None) -> str:
    """Assembly text of one dot-product variant (without the argument setup)."""
    w = (config or config_for(32)).storage_bytes
    if variant == "f32":
        return F32_DOT
    if variant == "f32-p":
        return F32_POSIT_DOT
    if variant == "p":
        return POSIT_DOT.format(w=w)
    if variant == "p-int":
        return POSIT_INT_DOT.format(w=w, ld=_INT_LOAD[w], st=_INT_STORE[w])
    raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")


def _setup(length: int) -> str:
    return (
        f"        li a0, {A_ADDR}\n        li a1, {B_ADDR}\n"
        f"        li a2, {length}\n        li a3, {OUT_ADDR}\n"
    )


def _f32_words(x) -> list[int]:
    return np.asarray(x, dtype=np.float32).view(np.uint32).tolist()


def run_dot(variant: str, a, b, config: PositConfig | None = None, **machine_kw):
    """Run a dot-product program on the emulator.

    ``a`` and ``b`` are float64 values; float variants round them to
    binary32, posit variants to the posit format.  Returns
    ``(value, machine, run_result)`` where ``value`` is the stored result.
    """
    cfg = config or config_for(32)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ValueError("need two equal-length non-empty vectors")
    prog = assemble(_setup(a.size) + dot_listing(variant, cfg))
    m = Machine(cfg, **machine_kw)
    m.load_program(prog)
    if variant.startswith("f32"):
        m.write_words(A_ADDR, _f32_words(a))
        m.write_words(B_ADDR, _f32_words(b))
    else:
        m.write_posits(A_ADDR, posit_round(a, cfg).tolist())
        m.write_posits(B_ADDR, posit_round(b, cfg).tolist())
    res = m.run()
    if variant.startswith("f32"):
        value = float(np.array(m.read_words(OUT_ADDR, 1), dtype=np.uint32).view(np.float32)[0])
    else:
        value = float(posit_value(np.array(m.read_posits(OUT_ADDR, 1)), cfg)[0])
    return value, m, res


def native_dot(variant: str, a, b, config: PositConfig | None = None) -> float:
    """The library computation the corresponding program must reproduce."""
    from .kernels import xdot
    from .modes import F32, NumericMode, Tag

    cfg = config or config_for(32)
    if variant == "f32":
        return float(xdot(a, b, F32))
    if variant == "f32-p":
        return float(xdot(a, b, NumericMode(Tag.F32_QN, cfg)))
    return float(xdot(a, b, NumericMode(Tag.QN, cfg)))
