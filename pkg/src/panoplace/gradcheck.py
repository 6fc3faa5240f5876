"""Finite-difference verification of autodiff gradients.

The check scalarizes an op through a fixed random projection, so the full
Jacobian action is exercised rather than just row sums. Inputs for checks
on kinked ops (ReLU, pooling) should come from `well_separated`, which
keeps every value away from zero and every pair of values apart — central
differences are meaningless astride a kink or a pooling tie.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .autodiff import Tensor


def well_separated(rng: np.random.Generator, shape: tuple[int, ...],
                   scale: float = 1.0) -> np.ndarray:
    """Random array whose values are pairwise distinct and bounded away from 0.

    A shuffled linspace over [-1, 1] plus sub-gap jitter: the minimum pairwise
    gap and the minimum |value| are both >= spacing/4, which for the desk-scale
    shapes used in tests is orders of magnitude above the FD step.
    """
    n = int(np.prod(shape))
    if n == 1:
        return np.full(shape, 0.5 * scale)
    base = np.linspace(-1.0, 1.0, n + (n % 2))[:n]  # even count avoids exact 0
    spacing = 2.0 / (n + (n % 2) - 1)
    jitter = rng.uniform(-spacing / 8, spacing / 8, size=n)
    values = rng.permutation(base + jitter) * scale
    return values.reshape(shape)


def fd_gradient(loss_fn: Callable[[np.ndarray], float], x: np.ndarray,
                eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function, element by element."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        f_plus = loss_fn(x)
        flat[i] = orig - eps
        f_minus = loss_fn(x)
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (2.0 * eps)
    return grad


def grad_check(op: Callable[[Tensor], Tensor], x: np.ndarray,
               eps: float = 1e-5, seed: int = 0) -> float:
    """Max relative error between the autodiff gradient of `op` and central FD.

    The scalar under test is sum(op(x) * R) with R a seeded random projection;
    the error metric is max over elements of |g_auto - g_fd| / max(1, |g_auto|,
    |g_fd|). The op must be deterministic (freeze any dropout mask via its rng).
    """
    x = np.asarray(x, dtype=np.float64)
    xt = Tensor(x.copy(), requires_grad=True)
    out = op(xt)
    proj = np.random.default_rng(seed).standard_normal(out.shape)

    loss = (out * Tensor(proj)).sum()
    loss.backward()
    g_auto = xt.grad if xt.grad is not None else np.zeros_like(x)

    def loss_fn(arr: np.ndarray) -> float:
        return float((op(Tensor(arr.copy())).data * proj).sum())

    g_fd = fd_gradient(loss_fn, x, eps=eps)
    denom = np.maximum(1.0, np.maximum(np.abs(g_auto), np.abs(g_fd)))
    return float(np.max(np.abs(g_auto - g_fd) / denom))
