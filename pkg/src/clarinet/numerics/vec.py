"""Vectorised posit/binary32 rounding on float64 arrays.

Posit values with n <= 32 are exactly representable in binary64, so arrays of
float64 serve as the carrier for posit data on the native (library-speed)
path.  Rounding from float64 is correctly rounded (RNE; value-nearest where
the exponent field is cut short, matching :func:`clarinet.posit.round_to_posit`).

Fused operations whose exact result is not a binary64 are first rounded to
odd in binary64 with error-free transformations; 53 bits is more than two
bits beyond any target precision used here, so the final rounding is exact.
"""

from __future__ import annotations

import numpy as np

from ..posit import PositConfig

__all__ = [
    "posit_round",
    "posit_value",
    "to_posit",
    "to_f32",
    "two_sum",
    "two_prod",
    "ro_add",
    "fma_ro",
    "f32_fma",
    "posit_fma",
]

_SPLIT = float(2**27 + 1)


def _check(cfg: PositConfig):
    if cfg.n > 32:
        raise ValueError("native posit arrays support n <= 32")


def _bit_length(v: np.ndarray) -> np.ndarray:
    # exact for v < 2**53
    return np.frexp(v.astype(np.float64))[1].astype(np.int64)


def posit_value(patterns, cfg: PositConfig) -> np.ndarray:
    """Exact float64 value of posit patterns (NaR -> nan)."""
    _check(cfg)
    n, es = cfg.n, cfg.es
    mask = np.int64(cfg.mask)
    pat = np.asarray(patterns, dtype=np.int64) & mask
    sign = (pat >> (n - 1)) & 1
    mag = np.where(sign == 1, (-pat) & mask, pat)
    body_mask = np.int64((1 << (n - 1)) - 1)
    body = mag & body_mask
    first = (body >> (n - 2)) & 1
    run = np.where(first == 1, (n - 1) - _bit_length(~body & body_mask), (n - 1) - _bit_length(body))
    k = np.where(first == 1, run - 1, -run)
    rem = np.maximum(n - 2 - run, 0)
    rest = body & ((np.int64(1) << rem) - 1)
    eb = np.minimum(es, rem)
    e = (rest >> (rem - eb)) << (es - eb)
    fb = rem - eb
    frac = rest & ((np.int64(1) << fb) - 1)
    scale = k * (1 << es) + e
    val = np.ldexp(((np.int64(1) << fb) + frac).astype(np.float64), (scale - fb).astype(np.int32))
    val = np.where(sign == 1, -val, val)
    val = np.where(pat == 0, 0.0, val)
    return np.where(pat == np.int64(cfg.nar), np.nan, val)


def posit_round(x, cfg: PositConfig) -> np.ndarray:
    """Round float64 values to posit patterns (int64), RNE with saturation."""
    _check(cfg)
    n, es = cfg.n, cfg.es
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    finite = np.isfinite(x)
    nz = finite & (ax > 0)
    safe = np.where(nz, ax, 1.0)
    m, E = np.frexp(safe)
    scale = E.astype(np.int64) - 1
    frac52 = np.ldexp(m, 53).astype(np.int64) - (np.int64(1) << 52)
    hi_sat = scale >= cfg.max_scale
    lo_sat = scale < cfg.min_scale
    sc = np.clip(scale, cfg.min_scale, cfg.max_scale - 1)
    k = sc >> es
    e = sc & ((1 << es) - 1)
    rlen = np.where(k >= 0, k + 2, -k + 1)
    rbits = np.where(k >= 0, ((np.int64(1) << np.maximum(k + 1, 0)) - 1) << 1, np.int64(1))
    avail = (n - 1) - rlen - es
    # fraction region: guard/sticky rounding on the bit string
    a = np.maximum(avail, 0)
    d = 52 - a
    head = (((rbits << es) | e) << a) | (frac52 >> d)
    guard = (frac52 >> (d - 1)) & 1
    sticky = (frac52 & ((np.int64(1) << (d - 1)) - 1)) != 0
    rounded = head + (guard & (sticky | (head & 1)).astype(np.int64))
    # cut-exponent region: nearest by value, ties to the even pattern
    ek = np.clip((n - 1) - rlen, 0, es)
    lo = (rbits << ek) | (e >> (es - ek))
    v_lo = posit_value(lo, cfg)
    v_hi = posit_value(lo + 1, cfg)
    mid = (v_lo + v_hi) * 0.5
    near = np.where(safe > mid, lo + 1, np.where(safe < mid, lo, lo + (lo & 1)))
    pat = np.where(avail >= 0, rounded, near)
    pat = np.where(hi_sat, np.int64(cfg.maxpos), pat)
    pat = np.where(lo_sat, np.int64(cfg.minpos), pat)
    pat = np.where(x < 0, (-pat) & np.int64(cfg.mask), pat)
    pat = np.where(nz, pat, 0)
    return np.where(finite, pat, np.int64(cfg.nar))


def to_posit(x, cfg: PositConfig) -> np.ndarray:
    """Round to the nearest posit and return its (exact) float64 value."""
    return posit_value(posit_round(x, cfg), cfg)


def to_f32(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).astype(np.float32).astype(np.float64)


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def two_prod(a, b):
    p = a * b
    ca = _SPLIT * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLIT * b
    bh = cb - (cb - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def ro_add(a, b):
    """a + b rounded to odd in binary64."""
    s, err = two_sum(a, b)
    even = (s.view(np.int64) & 1) == 0
    fix = (err != 0) & even
    if np.any(fix):
        s = np.where(fix, np.nextafter(s, np.where(err > 0, np.inf, -np.inf)), s)
    return s


def fma_ro(acc, a, b):
    """acc + a*b rounded to odd in binary64 (exact inputs)."""
    acc = np.asarray(acc, dtype=np.float64)
    p, e = two_prod(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
    th, tl = two_sum(acc, p)
    return ro_add(th, ro_add(tl, e))


def f32_fma(acc, a, b) -> np.ndarray:
    """binary32 fused multiply-add on binary32-valued float64 arrays."""
    acc = np.asarray(acc, dtype=np.float64)
    p = np.asarray(a, dtype=np.float64) * np.asarray(b, dtype=np.float64)  # exact
    return to_f32(ro_add(acc, p))


def posit_fma(acc, a, b, cfg: PositConfig) -> np.ndarray:
    """One quire session per element: init(acc), one fused multiply-add, read."""
    return to_posit(fma_ro(acc, a, b), cfg)
