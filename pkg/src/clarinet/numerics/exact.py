"""Exact quire sessions over batches, using Python integers.

A session is: initialise the quire (optionally with a posit), apply a list
of fused operations, read once.  The arithmetic mirrors
:class:`clarinet.quire.Quire` bit for bit (products land exactly on the
quire grid, quotients are pre-rounded to ``2n`` bits and then rounded onto
the grid, the register wraps at its width), but works on float64 carriers
so that whole batches can be processed without building Quire objects.
"""

from __future__ import annotations

import numpy as np

from ..posit import PositConfig, round_to_posit
from ..quire import QUOTIENT_EXTRA, quotient
from .vec import posit_value

__all__ = ["split", "quire_dot", "session"]

SIG_BITS = 28  # enough for any posit with n <= 32


def split(x: np.ndarray):
    """float64 posit values -> (int64 signed significands, int64 exponents)."""
    x = np.asarray(x, dtype=np.float64)
    m, e = np.frexp(x)
    sig = np.ldexp(m, SIG_BITS).astype(np.int64)
    return sig, e.astype(np.int64) - SIG_BITS


def _read(v: int, cfg: PositConfig) -> int:
    """Wrap an integer quire value to the register width and round it."""
    width = cfg.quire_width
    v &= (1 << width) - 1
    if v >> (width - 1):
        v -= 1 << width
    return round_to_posit(0, v, -cfg.quire_frac_bits, cfg)


def quire_dot(a, b, cfg: PositConfig, init=None) -> np.ndarray:
    """Row-wise exact dot products of posit-valued arrays, one rounding each.

    ``a`` and ``b`` have shape (rows, length); ``init`` optionally gives a
    per-row posit the quire starts from.  Returns posit patterns (int64).
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    fb = cfg.quire_frac_bits
    sa, ea = split(a)
    sb, eb = split(b)
    sig = sa * sb  # < 2**56
    shift = ea + eb + fb  # products of posits sit on or above the grid
    zero = sig == 0
    shift = np.where(zero, 0, shift)
    # any trailing zeros below the grid are exact; fold them in
    neg = shift < 0
    if np.any(neg):
        sig = np.where(neg, sig >> np.minimum(-shift, 63), sig)
        shift = np.where(neg, 0, shift)
    out = np.empty(a.shape[0], dtype=np.int64)
    if init is not None:
        si, ei = split(np.broadcast_to(np.asarray(init, dtype=np.float64), (a.shape[0],)))
        ishift = (ei + fb).tolist()
        isig = si.tolist()
    lshift = int.__lshift__
    for r in range(a.shape[0]):
        base = int(shift[r].min()) if a.shape[1] else 0
        total = sum(map(lshift, sig[r].tolist(), (shift[r] - base).tolist())) << base
        if init is not None and isig[r]:
            total += isig[r] << ishift[r] if ishift[r] >= 0 else isig[r] >> -ishift[r]
        out[r] = _read(total, cfg)
    return out


def session(ops, cfg: PositConfig, init=None, size=None) -> np.ndarray:
    """Run one quire session per batch element.

    ``ops`` is a list of ``(kind, x, y)`` with kind in {'fma', 'fms', 'fda',
    'fds'} and ``x``, ``y`` posit-valued float64 arrays (or scalars).
    Returns posit patterns; a division by zero yields NaR.
    """
    if size is None:
        size = max(np.size(x) for _, x, _ in ops) if ops else np.size(init)
    fb = cfg.quire_frac_bits
    qbits = QUOTIENT_EXTRA * cfg.n
    prepared = []
    for kind, x, y in ops:
        sx, ex = split(np.broadcast_to(np.asarray(x, dtype=np.float64), (size,)))
        sy, ey = split(np.broadcast_to(np.asarray(y, dtype=np.float64), (size,)))
        prepared.append((kind, sx.tolist(), ex.tolist(), sy.tolist(), ey.tolist()))
    if init is not None:
        si, ei = split(np.broadcast_to(np.asarray(init, dtype=np.float64), (size,)))
        si, ei = si.tolist(), ei.tolist()
    out = np.empty(size, dtype=np.int64)
    nar = cfg.nar
    for i in range(size):
        total = 0
        if init is not None and si[i]:
            s = ei[i] + fb
            total = si[i] << s if s >= 0 else si[i] >> -s
        bad = False
        for kind, sx, ex, sy, ey in prepared:
            a, b = sx[i], sy[i]
            if kind in ("fma", "fms"):
                if a == 0 or b == 0:
                    continue
                s = ex[i] + ey[i] + fb
                t = a * b
                t = t << s if s >= 0 else t >> -s
            else:
                if b == 0:
                    bad = True
                    break
                if a == 0:
                    continue
                neg = (a < 0) != (b < 0)
                q, qe = quotient(abs(a), ex[i], abs(b), ey[i], qbits)
                s = qe + fb
                if s >= 0:
                    t = q << s
                else:
                    drop = -s
                    t = q >> drop
                    rem = q & ((1 << drop) - 1)
                    half = 1 << (drop - 1)
                    if rem > half or (rem == half and t & 1):
                        t += 1
                t = -t if neg else t
            total += -t if kind in ("fms", "fds") else t
        out[i] = nar if bad else _read(total, cfg)
    return out


def session_values(ops, cfg: PositConfig, init=None, size=None) -> np.ndarray:
    return posit_value(session(ops, cfg, init, size), cfg)
