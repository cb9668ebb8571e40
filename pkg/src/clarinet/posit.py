"""Bit-exact posit encode/decode for any (n, es) configuration.

A posit pattern is held as a plain unsigned integer in the low ``n`` bits.
Decoding produces an :class:`UnpackedPosit` whose value is exactly

    (-1)**sign * 2**scale * (1 + frac / 2**frac_width)

and encoding (:func:`normalize`) rounds any such value to the nearest posit,
ties to the even pattern, saturating at maxpos/minpos.  Rounding never turns
a nonzero value into zero or NaR.

Most callers want the integer-level helpers (:func:`decode`,
:func:`round_to_posit`) which avoid allocating dataclasses in hot loops.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "PositConfig",
    "PositBits",
    "Kind",
    "UnpackedPosit",
    "DEFAULT_ES",
    "config_for",
    "extract",
    "normalize",
    "decode",
    "round_to_posit",
    "posit_from_binary32",
    "binary32_from_posit",
    "posit_from_float",
    "posit_to_float",
    "posit_to_fraction",
    "posit_from_fraction",
    "value_as_rational",
    "round_to_binary32",
    "CANONICAL_NAN32",
]

#: es used when only the width is given.  24 bits uses es=1 so that the
#: n*n/2 quire still holds maxpos**2 and minpos**2.
DEFAULT_ES = {8: 0, 16: 1, 24: 1, 32: 2}

CANONICAL_NAN32 = 0x7FC00000


@dataclass(frozen=True)
class PositConfig:
    """Width ``n`` and maximum exponent field width ``es``."""

    n: int
    es: int

    def __post_init__(self):
        if not 2 <= self.n <= 64:
            raise ValueError(f"posit width must be in 2..64, got {self.n}")
        if not 0 <= self.es <= 4:
            raise ValueError(f"es must be in 0..4, got {self.es}")

    @property
    def useed(self) -> int:
        return 1 << (1 << self.es)

    @property
    def max_scale(self) -> int:
        return (self.n - 2) << self.es

    @property
    def min_scale(self) -> int:
        return -self.max_scale

    @property
    def mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def nar(self) -> int:
        return 1 << (self.n - 1)

    @property
    def maxpos(self) -> int:
        return (1 << (self.n - 1)) - 1

    @property
    def minpos(self) -> int:
        return 1

    @property
    def quire_width(self) -> int:
        return (self.n * self.n + 1) // 2

    @property
    def quire_frac_bits(self) -> int:
        return 2 * self.max_scale

    @property
    def storage_bytes(self) -> int:
        """Bytes one posit occupies in memory (24-bit posits are word padded)."""
        nbytes = (self.n + 7) // 8
        return 4 if nbytes == 3 else nbytes

    def __str__(self):
        return f"posit<{self.n},{self.es}>"


def config_for(n: int, es: int | None = None) -> PositConfig:
    if es is None:
        if n not in DEFAULT_ES:
            raise ValueError(f"no default es for width {n}; pass es explicitly")
        es = DEFAULT_ES[n]
    return PositConfig(n, es)


@dataclass(frozen=True)
class PositBits:
    pattern: int
    config: PositConfig

    def __post_init__(self):
        if self.pattern >> self.config.n:
            raise ValueError(
                f"pattern {self.pattern:#x} does not fit in {self.config.n} bits"
            )

    @property
    def is_zero(self) -> bool:
        return self.pattern == 0

    @property
    def is_nar(self) -> bool:
        return self.pattern == self.config.nar

    def __repr__(self):
        width = (self.config.n + 3) // 4
        return f"PositBits(0x{self.pattern:0{width}x}, {self.config})"


class Kind(enum.Enum):
    ZERO = "zero"
    NAR = "nar"
    REGULAR = "regular"


@dataclass(frozen=True)
class UnpackedPosit:
    kind: Kind
    sign: int = 0
    scale: int = 0
    frac: int = 0
    frac_width: int = 0

    ZERO_VALUE = None  # set below
    NAR_VALUE = None

    @property
    def significand(self) -> int:
        """Integer significand including the hidden bit."""
        return (1 << self.frac_width) | self.frac

    @property
    def exponent(self) -> int:
        """Weight of the significand LSB: value = significand * 2**exponent."""
        return self.scale - self.frac_width

    def fields(self, config: PositConfig) -> tuple[int, int]:
        """Split ``scale`` into (regime k, exponent field)."""
        return self.scale >> config.es, self.scale & ((1 << config.es) - 1)


UnpackedPosit.ZERO_VALUE = UnpackedPosit(Kind.ZERO)
UnpackedPosit.NAR_VALUE = UnpackedPosit(Kind.NAR)


# ---------------------------------------------------------------------------
# Integer-level core


def decode(pattern: int, cfg: PositConfig):
    """Decode a regular pattern into ``(sign, scale, frac, frac_width)``.

    Returns ``None`` for zero and NaR; callers test for those first when it
    matters which one it was.
    """
    n = cfg.n
    pattern &= cfg.mask
    if pattern == 0 or pattern == cfg.nar:
        return None
    sign = pattern >> (n - 1)
    if sign:
        pattern = (-pattern) & cfg.mask
    # body: the n-1 bits after the sign
    body = pattern & ((1 << (n - 1)) - 1)
    nb = n - 1
    first = (body >> (nb - 1)) & 1
    if first:
        # run of ones: count leading ones in nb bits
        run = nb - ((~body) & ((1 << nb) - 1)).bit_length()
        k = run - 1
    else:
        run = nb - body.bit_length()
        k = -run
    rest = nb - run - 1  # bits after the terminator (may be -1 when no terminator)
    if rest < 0:
        rest = 0
    tail = body & ((1 << rest) - 1)
    es = cfg.es
    if rest >= es:
        exp = tail >> (rest - es)
        fw = rest - es
        frac = tail & ((1 << fw) - 1)
    else:
        # truncated exponent field: missing low bits read as zero
        exp = tail << (es - rest)
        fw = 0
        frac = 0
    return sign, (k << es) + exp, frac, fw


def _encode_magnitude(scale: int, sig: int, sig_bits: int, cfg: PositConfig) -> int:
    """Round a positive value ``sig * 2**(scale - sig_bits + 1)`` to a pattern.

    ``sig`` must have exactly ``sig_bits`` bits (hidden bit at sig_bits-1).
    Returns the (positive) n-bit pattern.
    """
    n, es = cfg.n, cfg.es
    if scale >= cfg.max_scale:
        return cfg.maxpos
    if scale < cfg.min_scale:
        return cfg.minpos
    k = scale >> es
    e = scale & ((1 << es) - 1)
    if k >= 0:
        reg_len = k + 2
        regime = ((1 << (k + 1)) - 1) << 1
    else:
        reg_len = 1 - k
        regime = 1
    fb = sig_bits - 1
    body = (((regime << es) | e) << fb) | (sig & ((1 << fb) - 1))
    total = reg_len + es + fb
    avail = n - 1
    if total <= avail:
        return body << (avail - total)
    drop = total - avail
    lo = body >> drop
    rem = body & ((1 << drop) - 1)
    if rem == 0:
        return lo
    if drop <= fb:
        # only fraction bits dropped: uniform spacing, guard/sticky rounding
        half = 1 << (drop - 1)
        if rem > half or (rem == half and lo & 1):
            lo += 1
        return lo
    # exponent bits were truncated; neighbours are not evenly spaced, compare
    # exact distances.
    hi = lo + 1
    lo_val = _pattern_fraction(lo, cfg)
    hi_val = _pattern_fraction(hi, cfg)
    v = Fraction(sig) * Fraction(2) ** (scale - fb)
    d_lo, d_hi = v - lo_val, hi_val - v
    if d_hi < d_lo or (d_hi == d_lo and hi & 1 == 0):
        return hi
    return lo


def _pattern_fraction(pattern: int, cfg: PositConfig) -> Fraction:
    sign, scale, frac, fw = decode(pattern, cfg)
    v = Fraction((1 << fw) | frac) * Fraction(2) ** (scale - fw)
    return -v if sign else v


def round_to_posit(sign: int, mant: int, exp: int, cfg: PositConfig) -> int:
    """Round the exact value ``(-1)**sign * mant * 2**exp`` to a posit pattern.

    ``mant`` is a non-negative integer; zero yields the zero pattern.
    """
    if mant == 0:
        return 0
    if mant < 0:
        mant, sign = -mant, sign ^ 1
    nbits = mant.bit_length()
    p = _encode_magnitude(exp + nbits - 1, mant, nbits, cfg)
    return (-p) & cfg.mask if sign else p


# ---------------------------------------------------------------------------
# Spec-level operations


def extract(p: PositBits) -> UnpackedPosit:
    """Decode a posit pattern into sign, scale and fraction."""
    cfg = p.config
    if p.pattern == 0:
        return UnpackedPosit.ZERO_VALUE
    if p.pattern == cfg.nar:
        return UnpackedPosit.NAR_VALUE
    sign, scale, frac, fw = decode(p.pattern, cfg)
    return UnpackedPosit(Kind.REGULAR, sign, scale, frac, fw)


def normalize(u: UnpackedPosit, config: PositConfig) -> PositBits:
    """Encode an unpacked value, rounding RNE with saturation."""
    if u.kind is Kind.ZERO:
        return PositBits(0, config)
    if u.kind is Kind.NAR:
        return PositBits(config.nar, config)
    if u.frac >> u.frac_width:
        raise ValueError("frac does not fit in frac_width bits")
    return PositBits(
        round_to_posit(u.sign, u.significand, u.exponent, config), config
    )


def value_as_rational(u: UnpackedPosit) -> Fraction:
    if u.kind is not Kind.REGULAR:
        raise ValueError(f"{u.kind.value} has no rational value")
    v = Fraction(u.significand) * Fraction(2) ** u.exponent
    return -v if u.sign else v


def posit_to_fraction(pattern: int, cfg: PositConfig) -> Fraction | None:
    """Exact value of a pattern; ``None`` for NaR."""
    if pattern == 0:
        return Fraction(0)
    if pattern == cfg.nar:
        return None
    return _pattern_fraction(pattern, cfg)


def posit_from_fraction(v: Fraction, cfg: PositConfig) -> int:
    """Round an exact rational to the nearest posit pattern."""
    v = Fraction(v)
    if v == 0:
        return 0
    sign = 1 if v < 0 else 0
    num, den = abs(v.numerator), v.denominator
    # enough quotient bits to resolve midpoints between neighbours whose
    # exponent fields were truncated; the remainder becomes a sticky bit
    shift = cfg.n + (1 << cfg.es) + 4 + den.bit_length() - num.bit_length()
    if shift > 0:
        q, r = divmod(num << shift, den)
    else:
        q, r = divmod(num, den << -shift)
    mant = (q << 1) | (1 if r else 0)
    return round_to_posit(sign, mant, -shift - 1, cfg)


# ---------------------------------------------------------------------------
# binary32 / binary64 conversion


def _split_binary32(w: int):
    """Return ('zero'|'inf'|'nan'|'num', sign, mant, exp) for a binary32 word."""
    w &= 0xFFFFFFFF
    sign = w >> 31
    e = (w >> 23) & 0xFF
    m = w & 0x7FFFFF
    if e == 0xFF:
        return ("nan" if m else "inf"), sign, 0, 0
    if e == 0:
        if m == 0:
            return "zero", sign, 0, 0
        return "num", sign, m, -149
    return "num", sign, m | 0x800000, e - 150


def posit_from_binary32(w: int, config: PositConfig) -> PositBits:
    kind, sign, mant, exp = _split_binary32(w)
    if kind == "zero":
        return PositBits(0, config)
    if kind in ("inf", "nan"):
        return PositBits(config.nar, config)
    return PositBits(round_to_posit(sign, mant, exp, config), config)


def round_to_binary32(sign: int, mant: int, exp: int) -> int:
    """Round ``(-1)**sign * mant * 2**exp`` to a binary32 word (RNE).

    Handles subnormals and overflows to infinity.
    """
    s = sign << 31
    if mant == 0:
        return s
    nbits = mant.bit_length()
    scale = exp + nbits - 1
    # target LSB weight: normal numbers keep 24 bits, subnormals are fixed
    lsb = max(scale - 23, -149)
    drop = lsb - exp
    if drop > 0:
        q = mant >> drop
        rem = mant & ((1 << drop) - 1)
        half = 1 << (drop - 1)
        if rem > half or (rem == half and q & 1):
            q += 1
    else:
        q = mant << -drop
    # q * 2**lsb, q < 2**24 unless rounding carried
    if q >> 24:
        q >>= 1
        lsb += 1
    if q < (1 << 23):
        # subnormal (lsb == -149)
        return s | q
    biased = lsb + 23 + 127
    if biased >= 0xFF:
        return s | 0x7F800000
    return s | (biased << 23) | (q & 0x7FFFFF)


def binary32_from_posit(p: PositBits) -> int:
    cfg = p.config
    if p.pattern == 0:
        return 0
    if p.pattern == cfg.nar:
        return CANONICAL_NAN32
    sign, scale, frac, fw = decode(p.pattern, cfg)
    return round_to_binary32(sign, (1 << fw) | frac, scale - fw)


def posit_from_float(x: float, cfg: PositConfig) -> int:
    """Round a Python float (binary64) to a posit pattern."""
    if x == 0:
        return 0
    if not math.isfinite(x):
        return cfg.nar
    m, e = math.frexp(x)
    mant = int(m * (1 << 53))
    return round_to_posit(0, mant, e - 53, cfg)


def posit_to_float(pattern: int, cfg: PositConfig) -> float:
    """Value of a pattern as a Python float (NaR -> nan).

    Exact whenever the posit fits binary64, which holds for n <= 54.
    """
    if pattern == 0:
        return 0.0
    if pattern == cfg.nar:
        return math.nan
    sign, scale, frac, fw = decode(pattern, cfg)
    v = math.ldexp((1 << fw) | frac, scale - fw)
    return -v if sign else v


def float_to_binary32(x: float) -> int:
    return struct.unpack("<I", struct.pack("<f", x))[0]


def binary32_to_float(w: int) -> float:
    return struct.unpack("<f", struct.pack("<I", w & 0xFFFFFFFF))[0]
