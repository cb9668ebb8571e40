"""Segmented fixed-point quire.

The register is ``n*n/2`` bits of two's complement fixed point with
``2 * max_scale`` fraction bits, stored as 32-bit segments (least
significant first) each paired with a zero flag.  Accumulation is exact;
reading rounds once.
"""

from __future__ import annotations

import enum

from .posit import (
    Kind,
    PositBits,
    PositConfig,
    UnpackedPosit,
    decode,
    extract,
    round_to_posit,
)

__all__ = ["Quire", "FusedOp", "SEGMENT_BITS", "QUOTIENT_EXTRA", "quotient"]

SEGMENT_BITS = 32

#: Division results are rounded to ``QUOTIENT_EXTRA * n`` significand bits
#: before being accumulated.
QUOTIENT_EXTRA = 2


class FusedOp(enum.Enum):
    MUL_ADD = "fma"
    MUL_SUB = "fms"
    DIV_ADD = "fda"
    DIV_SUB = "fds"

    @property
    def is_div(self) -> bool:
        return self in (FusedOp.DIV_ADD, FusedOp.DIV_SUB)

    @property
    def is_sub(self) -> bool:
        return self in (FusedOp.MUL_SUB, FusedOp.DIV_SUB)


def quotient(a_sig: int, a_exp: int, b_sig: int, b_exp: int, bits: int):
    """Round ``(a_sig*2**a_exp) / (b_sig*2**b_exp)`` to ``bits`` significant bits.

    Returns ``(q, exp)`` with ``q`` holding exactly ``bits`` bits (RNE).
    """
    # shift so the integer quotient has bits+1 or bits+2 bits
    shift = bits + 1 + b_sig.bit_length() - a_sig.bit_length()
    num = a_sig << shift if shift >= 0 else a_sig >> -shift
    q, r = divmod(num, b_sig)
    exp = a_exp - b_exp - shift
    extra = q.bit_length() - bits
    lost = q & ((1 << extra) - 1)
    q >>= extra
    exp += extra
    half = 1 << (extra - 1)
    if lost > half or (lost == half and (r or q & 1)):
        q += 1
        if q >> bits:
            q >>= 1
            exp += 1
    return q, exp


class Quire:
    """Mutable quire register.

    ``segment_bits`` is exposed for experimentation; the hardware uses 32.
    """

    def __init__(self, config: PositConfig, segment_bits: int = SEGMENT_BITS):
        width = config.quire_width
        if 4 * config.max_scale + 1 > width:
            raise ValueError(
                f"{config}: a {width}-bit quire cannot hold maxpos**2 and minpos**2"
            )
        self.config = config
        self.width = width
        self.frac_bits = config.quire_frac_bits
        self.segment_bits = segment_bits
        self.nsegments = -(-width // segment_bits)
        self.segments = [0] * self.nsegments
        self.seg_zero = [True] * self.nsegments
        self.is_nar = False
        self._seg_mask = (1 << segment_bits) - 1
        # only the low bits of the top segment belong to the register
        top_bits = width - segment_bits * (self.nsegments - 1)
        self._top_mask = (1 << top_bits) - 1

    @property
    def guard_bits(self) -> int:
        return self.width - (4 * self.config.max_scale + 1)

    # -- whole-register views ------------------------------------------------

    def to_int(self) -> int:
        """Signed integer whose value times 2**-frac_bits is the quire value."""
        v = 0
        for seg in reversed(self.segments):
            v = (v << self.segment_bits) | seg
        if v >> (self.width - 1):
            v -= 1 << self.width
        return v

    def _load_int(self, v: int):
        v &= (1 << self.width) - 1
        for i in range(self.nsegments):
            seg = v & self._seg_mask
            self.segments[i] = seg
            self.seg_zero[i] = seg == 0
            v >>= self.segment_bits

    def copy(self) -> "Quire":
        q = Quire(self.config, self.segment_bits)
        q.segments = list(self.segments)
        q.seg_zero = list(self.seg_zero)
        q.is_nar = self.is_nar
        return q

    def clear(self):
        self.segments = [0] * self.nsegments
        self.seg_zero = [True] * self.nsegments
        self.is_nar = False

    # -- operations ------------------------------------------------------------

    def init(self, p: PositBits) -> "Quire":
        """Load the exact value of ``p``."""
        if p.config != self.config:
            raise ValueError(f"posit {p.config} does not match quire {self.config}")
        self.clear()
        if p.pattern == self.config.nar:
            self.is_nar = True
        elif p.pattern:
            sign, scale, frac, fw = decode(p.pattern, self.config)
            mag = ((1 << fw) | frac) << (scale - fw + self.frac_bits)
            self._load_int(-mag if sign else mag)
        return self

    def accumulate(self, a: UnpackedPosit, b: UnpackedPosit, op: FusedOp) -> "Quire":
        """Add or subtract ``a*b`` (or ``a/b``) into the register."""
        if self.is_nar:
            return self
        if a.kind is Kind.NAR or b.kind is Kind.NAR:
            self.is_nar = True
            return self
        if op.is_div:
            if b.kind is Kind.ZERO:
                self.is_nar = True
                return self
            if a.kind is Kind.ZERO:
                return self
            mag, exp = quotient(
                a.significand,
                a.exponent,
                b.significand,
                b.exponent,
                QUOTIENT_EXTRA * self.config.n,
            )
        else:
            if a.kind is Kind.ZERO or b.kind is Kind.ZERO:
                return self
            mag = a.significand * b.significand
            exp = a.exponent + b.exponent
        negative = a.sign ^ b.sign ^ (1 if op.is_sub else 0)
        addend = self._align(mag, exp)
        if addend:
            self._add_segments(-addend if negative else addend)
        return self

    def _align(self, mag: int, exp: int) -> int:
        """Shift a magnitude onto the quire grid, rounding RNE below the LSB."""
        shift = exp + self.frac_bits
        if shift >= 0:
            return mag << shift
        drop = -shift
        q = mag >> drop
        rem = mag & ((1 << drop) - 1)
        half = 1 << (drop - 1)
        if rem > half or (rem == half and q & 1):
            q += 1
        return q

    def _add_segments(self, addend: int):
        """Ripple-carry add of a two's complement addend, segment by segment."""
        addend &= (1 << self.width) - 1
        carry = 0
        bits = self.segment_bits
        mask = self._seg_mask
        last = self.nsegments - 1
        for i in range(self.nsegments):
            part = addend & mask
            addend >>= bits
            if part == 0 and carry == 0:
                if addend == 0:
                    break
                continue
            s = self.segments[i] + part + carry
            carry = s >> bits
            s &= mask
            if i == last:
                s &= self._top_mask
            self.segments[i] = s
            self.seg_zero[i] = s == 0

    def leading_zero_count(self) -> int:
        """Leading zeros of the magnitude, skipping zero segments by flag."""
        if self.is_nar:
            raise ValueError("quire holds NaR")
        mag = self._magnitude_segments()
        top_bits = self.width - self.segment_bits * (self.nsegments - 1)
        count = 0
        for i in range(self.nsegments - 1, -1, -1):
            seg_width = top_bits if i == self.nsegments - 1 else self.segment_bits
            if mag[i] == 0:
                count += seg_width
                continue
            return count + seg_width - mag[i].bit_length()
        return count

    def _magnitude_segments(self) -> list[int]:
        """Segments of |value|; zero flags still apply when the value is positive."""
        if not (self.segments[-1] >> ((self.width - 1) % self.segment_bits)) & 1:
            return [0 if z else s for s, z in zip(self.segments, self.seg_zero)]
        v = -self.to_int()
        out = []
        for _ in range(self.nsegments):
            out.append(v & self._seg_mask)
            v >>= self.segment_bits
        return out

    def read(self) -> UnpackedPosit:
        """Round the register to a posit (one rounding for the whole chain)."""
        if self.is_nar:
            return UnpackedPosit.NAR_VALUE
        if all(self.seg_zero):
            return UnpackedPosit.ZERO_VALUE
        sign = (self.segments[-1] >> ((self.width - 1) % self.segment_bits)) & 1
        mag = 0
        for seg in reversed(self._magnitude_segments()):
            mag = (mag << self.segment_bits) | seg
        # the LZC fixes the scale; everything below the kept fraction is
        # folded into guard/sticky by round_to_posit
        nbits = self.width - self.leading_zero_count()
        scale = nbits - 1 - self.frac_bits
        pattern = round_to_posit(sign, mag, scale - (nbits - 1), self.config)
        return extract(PositBits(pattern, self.config))

    def read_bits(self) -> PositBits:
        u = self.read()
        if u.kind is Kind.ZERO:
            return PositBits(0, self.config)
        if u.kind is Kind.NAR:
            return PositBits(self.config.nar, self.config)
        return PositBits(
            round_to_posit(u.sign, u.significand, u.exponent, self.config),
            self.config,
        )

    def dump(self) -> str:
        """Stable text image: hex segments MSB first, then zero flags MSB first."""
        hexw = self.segment_bits // 4
        segs = " ".join(f"{s:0{hexw}x}" for s in reversed(self.segments))
        flags = "".join("1" if z else "0" for z in reversed(self.seg_zero))
        state = "NaR " if self.is_nar else ""
        return f"{state}{segs} | z={flags}"

    def __repr__(self):
        return f"Quire({self.config}, {self.dump()})"
