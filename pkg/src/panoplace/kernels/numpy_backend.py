"""Pure-numpy implementations of the hot kernels.

Reference semantics for the numba backend: both backends must agree to
floating-point roundoff on every kernel. Convolutions go through
sliding-window views plus tensordot so the heavy lifting lands in BLAS.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv3x3_forward(xp: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid 3x3 cross-correlation of a pre-padded input.

    xp: [N,C,H+2,W+2], w: [O,C,3,3], b: [O] -> out [N,O,H,W].
    """
    win = sliding_window_view(xp, (3, 3), axis=(2, 3))  # [N,C,H,W,3,3]
    out = np.tensordot(win, w, axes=([1, 4, 5], [1, 2, 3]))  # [N,H,W,O]
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))
    out += b[None, :, None, None]
    return out


def conv3x3_backward(xp: np.ndarray, w: np.ndarray,
                     gout: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Adjoints of conv3x3_forward w.r.t. padded input, weights, and bias."""
    win = sliding_window_view(xp, (3, 3), axis=(2, 3))  # [N,C,H,W,3,3]
    gw = np.tensordot(gout, win, axes=([0, 2, 3], [0, 2, 3]))  # [O,C,3,3]
    gb = gout.sum(axis=(0, 2, 3))
    # Gradient w.r.t. the padded input is a full correlation with the
    # 180-degree-rotated kernel.
    g2 = np.pad(gout, ((0, 0), (0, 0), (2, 2), (2, 2)))
    win2 = sliding_window_view(g2, (3, 3), axis=(2, 3))  # [N,O,H+2,W+2,3,3]
    wf = np.ascontiguousarray(w[:, :, ::-1, ::-1])
    gxp = np.tensordot(win2, wf, axes=([1, 4, 5], [0, 2, 3]))  # [N,H+2,W+2,C]
    gxp = np.ascontiguousarray(gxp.transpose(0, 3, 1, 2))
    return gxp, gw.astype(w.dtype, copy=False), gb


def maxpool2x2_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2/2x2 max pooling; returns (pooled, argmax index 0..3 per window).

    Window elements are ordered row-major, so np.argmax picks the first
    maximum in row-major order on ties.
    """
    n, c, h, w = x.shape
    win = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    win = win.reshape(n, c, h // 2, w // 2, 4)
    idx = np.argmax(win, axis=-1).astype(np.int8)
    out = np.take_along_axis(win, idx[..., None].astype(np.int64), axis=-1)[..., 0]
    return out, idx


def maxpool2x2_backward(idx: np.ndarray, gout: np.ndarray,
                        h: int, w: int) -> np.ndarray:
    """Route pooled gradients back to the argmax element of each window."""
    n, c, h2, w2 = gout.shape
    gx = np.zeros((n, c, h, w), dtype=gout.dtype)
    ii, jj = np.meshgrid(np.arange(h2), np.arange(w2), indexing="ij")
    rows = 2 * ii[None, None] + (idx >> 1)
    cols = 2 * jj[None, None] + (idx & 1)
    nn = np.arange(n)[:, None, None, None]
    cc = np.arange(c)[None, :, None, None]
    gx[nn, cc, rows, cols] = gout
    return gx


def rowmax_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise max over columns; returns (out [N,C,H,1], argmax column)."""
    idx = np.argmax(x, axis=3)
    out = np.take_along_axis(x, idx[..., None], axis=3)
    return out, idx


def rowmax_backward(idx: np.ndarray, gout: np.ndarray, w: int) -> np.ndarray:
    """Scatter row gradients to the (lowest-index) argmax column."""
    n, c, h, _ = gout.shape
    gx = np.zeros((n, c, h, w), dtype=gout.dtype)
    np.put_along_axis(gx, idx[..., None], gout, axis=3)
    return gx


def raycast_boxes(origin: np.ndarray, dirs: np.ndarray, boxes: np.ndarray,
                  t_min: float, t_max: float) -> tuple[np.ndarray, np.ndarray]:
    """Nearest axis-aligned-box hit per ray (slab test).

    origin: [3], dirs: [R,3] unit vectors, boxes: [B,6] as
    (xmin,xmax,ymin,ymax,zmin,zmax). Returns (t [R], hit box index [R],
    -1 where nothing is hit inside [t_min, t_max]).
    """
    r = dirs.shape[0]
    inv = np.where(np.abs(dirs) > 1e-12, 1.0 / np.where(dirs == 0, 1.0, dirs), 1e30)
    best_t = np.full(r, np.inf)
    best_b = np.full(r, -1, dtype=np.int64)
    for b in range(boxes.shape[0]):
        lo = (boxes[b, 0::2] - origin) * inv  # [R,3]
        hi = (boxes[b, 1::2] - origin) * inv
        tnear = np.minimum(lo, hi).max(axis=1)
        tfar = np.maximum(lo, hi).min(axis=1)
        hit = (tfar >= tnear) & (tnear >= t_min) & (tnear <= t_max) & (tnear < best_t)
        best_t[hit] = tnear[hit]
        best_b[hit] = b
    return best_t, best_b
