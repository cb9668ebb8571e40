"""Scalar binary32 arithmetic on raw bit patterns (round-to-nearest-even).

Add, subtract, multiply, divide and square root are computed in binary64
and rounded once to binary32; binary64 carries more than twice the binary32
precision plus two bits, so the double rounding is innocuous.  The fused
multiply-add is computed exactly with integers and rounded once.

Any NaN result is the canonical quiet NaN, as on RISC-V.
"""

from __future__ import annotations

import math
import struct

from .posit import CANONICAL_NAN32, round_to_binary32

_pack_f = struct.Struct("<f").pack
_unpack_f = struct.Struct("<f").unpack
_pack_I = struct.Struct("<I").pack
_unpack_I = struct.Struct("<I").unpack

INF32 = 0x7F800000


def to_float(w: int) -> float:
    return _unpack_f(_pack_I(w & 0xFFFFFFFF))[0]


def from_float(x: float) -> int:
    """Round a binary64 value to binary32 bits (RNE, canonical NaN)."""
    if x != x:
        return CANONICAL_NAN32
    try:
        return _unpack_I(_pack_f(x))[0]
    except OverflowError:
        return INF32 | (0x80000000 if x < 0 else 0)


def is_nan(w: int) -> bool:
    return (w & 0x7F800000) == 0x7F800000 and (w & 0x7FFFFF) != 0


def add(a: int, b: int) -> int:
    return from_float(to_float(a) + to_float(b))


def sub(a: int, b: int) -> int:
    return from_float(to_float(a) - to_float(b))


def mul(a: int, b: int) -> int:
    return from_float(to_float(a) * to_float(b))


def div(a: int, b: int) -> int:
    x, y = to_float(a), to_float(b)
    if y == 0.0:
        if x == 0.0 or x != x:
            return CANONICAL_NAN32
        neg = (math.copysign(1, x) < 0) != (math.copysign(1, y) < 0)
        return INF32 | (0x80000000 if neg else 0)
    return from_float(x / y)


def sqrt(a: int) -> int:
    x = to_float(a)
    if x != x or x < 0:
        return CANONICAL_NAN32
    return from_float(math.sqrt(x)) if x else a  # keeps the sign of zero


def _split(w: int):
    """Finite binary32 -> (sign, integer significand, exponent)."""
    s = w >> 31
    e = (w >> 23) & 0xFF
    f = w & 0x7FFFFF
    if e == 0:
        return s, f, -149
    return s, f | 0x800000, e - 150


def fma(a: int, b: int, c: int, negate_product: bool = False, negate_addend: bool = False) -> int:
    """(+/-)a*b (+/-)c with a single rounding."""
    a &= 0xFFFFFFFF
    b &= 0xFFFFFFFF
    c &= 0xFFFFFFFF
    if negate_product:
        a ^= 0x80000000
    if negate_addend:
        c ^= 0x80000000
    if is_nan(a) or is_nan(b) or is_nan(c):
        return CANONICAL_NAN32
    a_inf = (a & 0x7FFFFFFF) == INF32
    b_inf = (b & 0x7FFFFFFF) == INF32
    c_inf = (c & 0x7FFFFFFF) == INF32
    if a_inf or b_inf or c_inf:
        return from_float(to_float(a) * to_float(b) + to_float(c))
    sa, ma, ea = _split(a)
    sb, mb, eb = _split(b)
    sc, mc, ec = _split(c)
    sp = sa ^ sb
    mp, ep = ma * mb, ea + eb
    if mp == 0 and mc == 0:
        # exact zero: -0 only when both terms are -0
        return 0x80000000 if (sp and sc) else 0
    e = min(ep, ec)
    total = (-mp if sp else mp) << (ep - e)
    total += (-mc if sc else mc) << (ec - e)
    if total == 0:
        return 0
    return round_to_binary32(1 if total < 0 else 0, abs(total), e)


def fmin(a: int, b: int) -> int:
    na, nb = is_nan(a), is_nan(b)
    if na and nb:
        return CANONICAL_NAN32
    if na or nb:
        return b if na else a
    x, y = to_float(a), to_float(b)
    if x == y:
        return a | b  # -0 wins
    return a if x < y else b


def fmax(a: int, b: int) -> int:
    na, nb = is_nan(a), is_nan(b)
    if na and nb:
        return CANONICAL_NAN32
    if na or nb:
        return b if na else a
    x, y = to_float(a), to_float(b)
    if x == y:
        return a & b  # +0 wins
    return a if x > y else b


def to_int32(w: int, unsigned: bool = False) -> int:
    """fcvt.w[u].s with round-to-nearest-even and RISC-V saturation."""
    lo, hi = (0, 2**32 - 1) if unsigned else (-(2**31), 2**31 - 1)
    if is_nan(w):
        return hi & 0xFFFFFFFF
    x = to_float(w)
    if math.isinf(x):
        v = hi if x > 0 else lo
    else:
        v = min(max(round(x), lo), hi)  # round() is ties-to-even
    return v & 0xFFFFFFFF


def from_int32(v: int, unsigned: bool = False) -> int:
    v &= 0xFFFFFFFF
    if not unsigned and v >> 31:
        v -= 1 << 32
    return from_float(float(v))  # exact in binary64, single rounding
