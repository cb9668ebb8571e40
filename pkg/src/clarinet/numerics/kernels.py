"""BLAS-style kernels in every numeric mode, batched over leading axes.

All kernels take float64 inputs, round them into the mode's data type and
return float64 arrays holding values of that type.  A leading batch axis is
allowed everywhere (one entry per Monte Carlo trial).

Quire use is counted in an optional :class:`Audit`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exact import quire_dot, session
from .modes import NumericMode, Tag
from .vec import f32_fma, posit_fma, posit_value, to_f32, to_posit

__all__ = ["Audit", "quantize", "xdot", "xgemv", "xgemm", "xgivens", "GivensUnsupported"]


@dataclass
class Audit:
    """Quire session bookkeeping: inits, reads and accumulations."""

    inits: int = 0
    reads: int = 0
    accumulations: int = 0
    depths: list = field(default_factory=list)

    def session(self, accumulations: int, count: int = 1):
        if count <= 0:
            return
        self.inits += count
        self.reads += count
        self.accumulations += accumulations * count
        self.depths.append((accumulations, count))

    @property
    def accumulations_per_read(self) -> float:
        return self.accumulations / self.reads if self.reads else 0.0

    @property
    def depth_set(self) -> set[int]:
        return {d for d, _ in self.depths}


def quantize(x, mode: NumericMode) -> np.ndarray:
    """Round inputs into the mode's storage type."""
    x = np.asarray(x, dtype=np.float64)
    if mode.tag is Tag.F64REF:
        return x.copy()
    if mode.tag in (Tag.F32, Tag.F32_QN):
        return to_f32(x)
    return to_posit(x, mode.config)


def _dot_rows(a: np.ndarray, b: np.ndarray, mode: NumericMode, audit: Audit | None) -> np.ndarray:
    """Dot products along the last axis of already-quantised 2-D arrays."""
    rows, length = a.shape
    tag = mode.tag
    if tag is Tag.F64REF:
        acc = np.zeros(rows)
        for i in range(length):
            acc = acc + a[:, i] * b[:, i]
        return acc
    if tag is Tag.F32:
        acc = np.zeros(rows)
        for i in range(length):
            acc = f32_fma(acc, a[:, i], b[:, i])
        return acc
    cfg = mode.config
    if tag is Tag.PN:
        acc = np.zeros(rows)
        for i in range(length):
            acc = posit_fma(acc, a[:, i], b[:, i], cfg)
        if audit is not None:
            audit.session(1, rows * length)
        return acc
    if tag is Tag.QN:
        out = posit_value(quire_dot(a, b, cfg), cfg)
    else:  # F32_QN: convert binary32 operands, accumulate, convert back
        out = to_f32(posit_value(quire_dot(to_posit(a, cfg), to_posit(b, cfg), cfg), cfg))
    if audit is not None:
        audit.session(length, rows)
    return out


def xdot(a, b, mode: NumericMode, audit: Audit | None = None) -> np.ndarray:
    """Dot product along the last axis; leading axes are batch axes."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.shape[-1] < 1:
        raise ValueError("empty vectors")
    lead = a.shape[:-1]
    qa, qb = quantize(a, mode), quantize(b, mode)
    out = _dot_rows(qa.reshape(-1, a.shape[-1]), qb.reshape(-1, a.shape[-1]), mode, audit)
    return out.reshape(lead) if lead else out[0]


def xgemv(A, x, mode: NumericMode, audit: Audit | None = None) -> np.ndarray:
    """y = A x; one quire session per output element."""
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if A.shape[-1] != x.shape[-1] or A.shape[:-2] != x.shape[:-1]:
        raise ValueError(f"shape mismatch: {A.shape} @ {x.shape}")
    xb = np.broadcast_to(x[..., None, :], A.shape)
    return xdot(A, xb, mode, audit)


def xgemm(A, B, mode: NumericMode, audit: Audit | None = None) -> np.ndarray:
    """C = A B; one quire session per output element."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[-1] != B.shape[-2] or A.shape[:-2] != B.shape[:-2]:
        raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
    m, k = A.shape[-2:]
    n = B.shape[-1]
    Ab = np.broadcast_to(A[..., :, None, :], A.shape[:-2] + (m, n, k))
    Bt = np.swapaxes(B, -1, -2)
    Bb = np.broadcast_to(Bt[..., None, :, :], B.shape[:-2] + (m, n, k))
    return xdot(Ab, Bb, mode, audit)


class GivensUnsupported(ValueError):
    """Pure per-operation posit mode cannot run Givens: no posit square root."""


def _givens_coeffs(a, b, mode: NumericMode, audit: Audit | None, active: int):
    """(r, c, s) for rotating (a, b) onto (r, 0)."""
    tag = mode.tag
    if tag is Tag.F64REF:
        r = np.sqrt(a * a + b * b)
        return r, a / r, b / r
    if tag is Tag.F32:
        r2 = f32_fma(to_f32(b * b), a, a)
        r = to_f32(np.sqrt(r2))
        return r, to_f32(a / r), to_f32(b / r)
    cfg = mode.config
    P = lambda pats: posit_value(pats, cfg)  # noqa: E731
    # r**2 = a*a + b*b, exact in the quire, rounded once
    r2 = P(session([("fma", a, a), ("fma", b, b)], cfg))
    # square root: binary32 seed, one Newton step r = r0/2 + r2/(2 r0) in the quire
    r0 = to_f32(np.sqrt(to_f32(r2)))
    r0 = np.where(r0 == 0, 1.0, r0)
    r = P(session([("fda", r2, to_posit(2 * r0, cfg))], cfg, init=to_posit(r0 / 2, cfg)))
    c = P(session([("fda", a, r)], cfg))
    s = P(session([("fda", b, r)], cfg))
    if audit is not None:
        audit.session(2, active)
        audit.session(1, 3 * active)
    if tag is Tag.F32_QN:
        r, c, s = to_f32(r), to_f32(c), to_f32(s)
    return r, c, s


def _rotate(c, s, x, y, mode: NumericMode, audit: Audit | None, active: int):
    """(c x + s y, c y - s x)."""
    tag = mode.tag
    if tag is Tag.F64REF:
        return c * x + s * y, c * y - s * x
    if tag is Tag.F32:
        return f32_fma(to_f32(s * y), c, x), f32_fma(to_f32(-s * x), c, y)
    cfg = mode.config
    if tag is Tag.F32_QN:
        c, s, x, y = (to_posit(v, cfg) for v in (c, s, x, y))
    size = x.size
    flat = lambda v: np.broadcast_to(v, x.shape).reshape(-1)  # noqa: E731
    cf, sf, xf, yf = flat(c), flat(s), flat(x), flat(y)
    nx = posit_value(session([("fma", cf, xf), ("fma", sf, yf)], cfg, size=size), cfg)
    ny = posit_value(session([("fma", cf, yf), ("fms", sf, xf)], cfg, size=size), cfg)
    if audit is not None:
        audit.session(2, 2 * active)
    nx, ny = nx.reshape(x.shape), ny.reshape(x.shape)
    if tag is Tag.F32_QN:
        nx, ny = to_f32(nx), to_f32(ny)
    return nx, ny


def xgivens(A, mode: NumericMode, audit: Audit | None = None):
    """Upper-triangularise square ``A`` with Givens rotations; returns R.

    Rotations run bottom-up within each column, zeroing ``A[i, j]`` against
    ``A[i-1, j]``.  A rotation is skipped (per batch entry) when the element
    is already zero.  In quire modes the rotation coefficients come from
    quire sessions around a binary32 square-root seed, and every rotated
    element is a two-product quire session rounded once.
    """
    if mode.tag is Tag.PN:
        raise GivensUnsupported(
            "Givens needs a square root, which the posit unit does not provide; "
            "use a quire mode (qN/f32-qN), whose square-root seed runs in binary32"
        )
    A = np.asarray(A, dtype=np.float64)
    if A.shape[-1] != A.shape[-2]:
        raise ValueError(f"square matrix required, got {A.shape}")
    squeeze = A.ndim == 2
    R = quantize(A.reshape((-1,) + A.shape[-2:]), mode)
    N = R.shape[-1]
    for j in range(N - 1):
        for i in range(N - 1, j, -1):
            b = R[:, i, j]
            act = b != 0
            if not np.any(act):
                continue
            idx = np.nonzero(act)[0]
            a = R[idx, i - 1, j]
            bb = R[idx, i, j]
            nact = idx.size
            r, c, s = _givens_coeffs(a, bb, mode, audit, nact)
            R[idx, i - 1, j] = r
            R[idx, i, j] = 0.0
            if j + 1 < N:
                x = R[idx, i - 1, j + 1 :]
                y = R[idx, i, j + 1 :]
                nx, ny = _rotate(c[:, None], s[:, None], x, y, mode, audit, nact * (N - j - 1))
                R[idx, i - 1, j + 1 :] = nx
                R[idx, i, j + 1 :] = ny
    return R[0] if squeeze else R.reshape(A.shape)
