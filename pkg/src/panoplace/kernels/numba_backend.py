"""Numba-compiled hot kernels.

Loop bodies mirror kernels/numpy_backend.py; prange only ever splits
independent output slices, so results are deterministic run to run.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(parallel=True, fastmath=True, cache=True)
def conv3x3_forward(xp, w, b):
    n, c_in, hp, wp = xp.shape
    c_out = w.shape[0]
    h = hp - 2
    wd = wp - 2
    out = np.empty((n, c_out, h, wd), dtype=xp.dtype)
    for ni in prange(n):
        for o in range(c_out):
            for i in range(h):
                for j in range(wd):
                    out[ni, o, i, j] = b[o]
            for c in range(c_in):
                for u in range(3):
                    for v in range(3):
                        wv = w[o, c, u, v]
                        for i in range(h):
                            for j in range(wd):
                                out[ni, o, i, j] += wv * xp[ni, c, i + u, j + v]
    return out


@njit(parallel=True, fastmath=True, cache=True)
def conv3x3_backward(xp, w, gout):
    n, c_in, hp, wp = xp.shape
    c_out = w.shape[0]
    h = hp - 2
    wd = wp - 2
    gxp = np.zeros(xp.shape, dtype=xp.dtype)
    gw = np.empty(w.shape, dtype=w.dtype)
    gb = np.empty(c_out, dtype=gout.dtype)
    for ni in prange(n):
        for c in range(c_in):
            for o in range(c_out):
                for u in range(3):
                    for v in range(3):
                        wv = w[o, c, u, v]
                        for i in range(h):
                            for j in range(wd):
                                gxp[ni, c, i + u, j + v] += wv * gout[ni, o, i, j]
    zero = xp.dtype.type(0)
    for o in prange(c_out):
        sb = zero
        for ni in range(n):
            for i in range(h):
                for j in range(wd):
                    sb += gout[ni, o, i, j]
        gb[o] = sb
        for c in range(c_in):
            for u in range(3):
                for v in range(3):
                    s = zero
                    for ni in range(n):
                        for i in range(h):
                            for j in range(wd):
                                s += gout[ni, o, i, j] * xp[ni, c, i + u, j + v]
                    gw[o, c, u, v] = s
    return gxp, gw, gb


@njit(parallel=True, cache=True)
def maxpool2x2_forward(x):
    n, c, h, w = x.shape
    h2 = h // 2
    w2 = w // 2
    out = np.empty((n, c, h2, w2), dtype=x.dtype)
    idx = np.empty((n, c, h2, w2), dtype=np.int8)
    for ni in prange(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    best = x[ni, ci, 2 * i, 2 * j]
                    k = 0
                    # strict > keeps the first row-major maximum on ties
                    if x[ni, ci, 2 * i, 2 * j + 1] > best:
                        best = x[ni, ci, 2 * i, 2 * j + 1]
                        k = 1
                    if x[ni, ci, 2 * i + 1, 2 * j] > best:
                        best = x[ni, ci, 2 * i + 1, 2 * j]
                        k = 2
                    if x[ni, ci, 2 * i + 1, 2 * j + 1] > best:
                        best = x[ni, ci, 2 * i + 1, 2 * j + 1]
                        k = 3
                    out[ni, ci, i, j] = best
                    idx[ni, ci, i, j] = k
    return out, idx


@njit(parallel=True, cache=True)
def maxpool2x2_backward(idx, gout, h, w):
    n, c, h2, w2 = gout.shape
    gx = np.zeros((n, c, h, w), dtype=gout.dtype)
    for ni in prange(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    k = idx[ni, ci, i, j]
                    gx[ni, ci, 2 * i + (k >> 1), 2 * j + (k & 1)] = gout[ni, ci, i, j]
    return gx


@njit(parallel=True, cache=True)
def rowmax_forward(x):
    n, c, h, w = x.shape
    out = np.empty((n, c, h, 1), dtype=x.dtype)
    idx = np.empty((n, c, h), dtype=np.int64)
    for ni in prange(n):
        for ci in range(c):
            for i in range(h):
                best = x[ni, ci, i, 0]
                k = 0
                for j in range(1, w):
                    if x[ni, ci, i, j] > best:
                        best = x[ni, ci, i, j]
                        k = j
                out[ni, ci, i, 0] = best
                idx[ni, ci, i] = k
    return out, idx


@njit(parallel=True, cache=True)
def rowmax_backward(idx, gout, w):
    n, c, h, _ = gout.shape
    gx = np.zeros((n, c, h, w), dtype=gout.dtype)
    for ni in prange(n):
        for ci in range(c):
            for i in range(h):
                gx[ni, ci, i, idx[ni, ci, i]] = gout[ni, ci, i, 0]
    return gx


@njit(parallel=True, cache=True)
def raycast_boxes(origin, dirs, boxes, t_min, t_max):
    r = dirs.shape[0]
    nb = boxes.shape[0]
    best_t = np.full(r, np.inf)
    best_b = np.full(r, -1, dtype=np.int64)
    for ri in prange(r):
        bt = np.inf
        bb = -1
        for b in range(nb):
            tnear = -1e30
            tfar = 1e30
            for ax in range(3):
                d = dirs[ri, ax]
                if np.abs(d) > 1e-12:
                    inv = 1.0 / d
                else:
                    inv = 1e30
                t1 = (boxes[b, 2 * ax] - origin[ax]) * inv
                t2 = (boxes[b, 2 * ax + 1] - origin[ax]) * inv
                lo = min(t1, t2)
                hi = max(t1, t2)
                if lo > tnear:
                    tnear = lo
                if hi < tfar:
                    tfar = hi
            if tfar >= tnear and t_min <= tnear <= t_max and tnear < bt:
                bt = tnear
                bb = b
        best_t[ri] = bt
        best_b[ri] = bb
    return best_t, best_b
