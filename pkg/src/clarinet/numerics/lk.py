"""Lucas-Kanade velocity kernel and plain PGM (P5) image I/O.

Per pixel, the window sums of Ix*Ix, Ix*Iy, Iy*Iy, Ix*It and Iy*It are dot
products over the window; they accumulate in the selected numeric mode.
The 2x2 system is solved in binary32 (binary64 for the reference mode).

Gradients are central differences; the temporal gradient is the frame
difference.  In posit modes the gradients are formed from posit pixel
values with one quire session each (difference, then halving), so the
whole pipeline stays in posits up to the final solve.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .exact import session
from .kernels import _dot_rows
from .modes import NumericMode, Tag
from .vec import posit_value, to_f32, to_posit

__all__ = ["read_pgm", "write_pgm", "lucas_kanade_velocity", "translated_blob", "write_matrix_csv"]


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM into a float64 array of grey levels."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    w, h, maxval = (int(t) for t in tokens[1:])
    pos += 1  # single whitespace after maxval
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    pix = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos)
    return pix.reshape(h, w).astype(np.float64)


def write_pgm(path, image: np.ndarray, maxval: int = 255):
    img = np.clip(np.rint(image), 0, maxval)
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode() + img.astype(dtype).tobytes())


def write_matrix_csv(path, m: np.ndarray, fmt: str = "%.9g"):
    np.savetxt(path, m, delimiter=",", fmt=fmt)


def translated_blob(size: int = 32, shift: tuple[float, float] = (1.0, 0.0), sigma: float = 4.0):
    """Two frames of a Gaussian blob, the second moved by ``shift`` = (dx, dy)."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    c = (size - 1) / 2

    def blob(dx, dy):
        return 255.0 * np.exp(-((xx - c - dx) ** 2 + (yy - c - dy) ** 2) / (2 * sigma**2))

    return blob(0.0, 0.0), blob(*shift)


def _gradients(f1, f2, mode: NumericMode):
    """Ix, Iy, It on the interior (shape (h-2, w-2))."""
    tag = mode.tag
    if tag is Tag.F64REF:
        ix = (f1[1:-1, 2:] - f1[1:-1, :-2]) / 2
        iy = (f1[2:, 1:-1] - f1[:-2, 1:-1]) / 2
        it = f2[1:-1, 1:-1] - f1[1:-1, 1:-1]
        return ix, iy, it
    if tag in (Tag.F32, Tag.F32_QN):
        g1, g2 = to_f32(f1), to_f32(f2)
        ix = to_f32(to_f32(g1[1:-1, 2:] - g1[1:-1, :-2]) / 2)
        iy = to_f32(to_f32(g1[2:, 1:-1] - g1[:-2, 1:-1]) / 2)
        it = to_f32(g2[1:-1, 1:-1] - g1[1:-1, 1:-1])
        return ix, iy, it
    cfg = mode.config
    p1, p2 = to_posit(f1, cfg), to_posit(f2, cfg)
    one, two = 1.0, 2.0

    def diff(a, b, halve):
        shape = a.shape
        a, b = a.reshape(-1), b.reshape(-1)
        d = posit_value(session([("fms", b, one)], cfg, init=a, size=a.size), cfg)
        if halve:
            d = posit_value(session([("fda", d, two)], cfg, size=d.size), cfg)
        return d.reshape(shape)

    ix = diff(p1[1:-1, 2:], p1[1:-1, :-2], True)
    iy = diff(p1[2:, 1:-1], p1[:-2, 1:-1], True)
    it = diff(p2[1:-1, 1:-1], p1[1:-1, 1:-1], False)
    return ix, iy, it


def _windows(g: np.ndarray, window: int) -> np.ndarray:
    """(h', w', window*window) stacks of each window."""
    v = np.lib.stride_tricks.sliding_window_view(g, (window, window))
    return v.reshape(v.shape[0], v.shape[1], window * window)


def lucas_kanade_velocity(frame1, frame2, window: int, mode: NumericMode, normalize: bool = False):
    """Per-pixel velocity (u, v) between two frames.

    Returns ``(u, v)`` arrays of the input shape; pixels without a full
    window or with a singular 2x2 system are NaN.
    """
    f1 = np.asarray(frame1, dtype=np.float64)
    f2 = np.asarray(frame2, dtype=np.float64)
    if f1.shape != f2.shape:
        raise ValueError("frames differ in size")
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    if normalize:
        f1, f2 = f1 * (16.0 / 255.0), f2 * (16.0 / 255.0)
    ix, iy, it = _gradients(f1, f2, mode)
    wx, wy, wt = (_windows(g, window) for g in (ix, iy, it))
    hh, ww, L = wx.shape
    flat = lambda w: w.reshape(-1, L)  # noqa: E731
    pairs = [(wx, wx), (wx, wy), (wy, wy), (wx, wt), (wy, wt)]
    sums = [_dot_rows(flat(a), flat(b), mode, None).reshape(hh, ww) for a, b in pairs]
    sxx, sxy, syy, sxt, syt = sums
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if mode.tag is Tag.F64REF:
            det = sxx * syy - sxy * sxy
            u = (-syy * sxt + sxy * syt) / det
            v = (sxy * sxt - sxx * syt) / det
        else:
            sxx, sxy, syy, sxt, syt = (to_f32(s) for s in sums)
            det = to_f32(to_f32(sxx * syy) - to_f32(sxy * sxy))
            u = to_f32(to_f32(to_f32(sxy * syt) - to_f32(syy * sxt)) / det)
            v = to_f32(to_f32(to_f32(sxy * sxt) - to_f32(sxx * syt)) / det)
        bad = ~np.isfinite(det) | (det == 0)
    u = np.where(bad, np.nan, u)
    v = np.where(bad, np.nan, v)
    full_u = np.full(f1.shape, np.nan)
    full_v = np.full(f1.shape, np.nan)
    off = 1 + window // 2
    full_u[off : off + hh, off : off + ww] = u
    full_v[off : off + hh, off : off + ww] = v
    return full_u, full_v
