"""Neural layer vocabulary: convolution (zero or horizontally circular
padding), 2x2 max pooling, row-wise max pooling, batch norm, dropout,
fully-connected, and softmax cross-entropy.

Layers are pure functions of (input, params, rng); each records its own
adjoint on the autodiff graph. Spatial kernels dispatch to the selected
kernels backend.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .autodiff import Tensor
from .errors import ContractViolation

log = logging.getLogger(__name__)

ZERO = "zero"
CIRCULAR = "circular_horizontal"


@dataclass
class ConvParams:
    """3x3 stride-1 convolution parameters.

    weights: [out_channels, in_channels, 3, 3]; bias: [out_channels].
    """
    weights: Tensor
    bias: Tensor
    padding_mode: str = ZERO

    def __post_init__(self):
        if self.weights.shape[2:] != (3, 3):
            raise ContractViolation(f"kernel must be 3x3, got {self.weights.shape[2:]}")
        if self.padding_mode not in (ZERO, CIRCULAR):
            raise ContractViolation(f"unknown padding mode {self.padding_mode!r}")


@dataclass
class BatchNormParams:
    gamma: Tensor
    beta: Tensor
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = 1e-5
    momentum: float = 0.1
    num_batches: int = 0  # 0 means running stats are still the (0,1) init


@dataclass
class DropoutParams:
    rate: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ContractViolation(f"dropout rate must be in [0,1), got {self.rate}")


def _pad_input(x: np.ndarray, mode: str) -> np.ndarray:
    """1-pixel padding: zeros everywhere, or wrapped columns + zero rows."""
    if mode == ZERO:
        return np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (0, 0)))
    return np.concatenate([xp[:, :, :, -1:], xp, xp[:, :, :, :1]], axis=3)


def conv2d(x: Tensor, params: ConvParams) -> Tensor:
    """3x3 stride-1 cross-correlation; output spatial size equals input."""
    if x.ndim != 4:
        raise ContractViolation(f"conv2d expects [N,C,H,W], got {x.shape}")
    n, c, h, w = x.shape
    if c != params.weights.shape[1]:
        raise ContractViolation(
            f"input has {c} channels, kernel expects {params.weights.shape[1]}")
    if h < 1 or w < 3:
        raise ContractViolation(f"conv2d needs H>=1 and W>=3, got {h}x{w}")
    mode = params.padding_mode
    wt, bt = params.weights, params.bias
    xp = _pad_input(x.data, mode)
    out_data = kernels.conv3x3_forward(xp, wt.data, bt.data)

    def backward(g):
        gxp, gw, gb = kernels.conv3x3_backward(xp, wt.data, g)
        gx = gxp[:, :, 1:-1, 1:-1].copy()
        if mode == CIRCULAR:
            # fold wrapped-column gradients back onto their source columns
            gx[:, :, :, -1] += gxp[:, :, 1:-1, 0]
            gx[:, :, :, 0] += gxp[:, :, 1:-1, -1]
        x.accumulate(gx)
        wt.accumulate(gw)
        bt.accumulate(gb)

    return Tensor._result(out_data, (x, wt, bt), backward)


def max_pool_2x2(x: Tensor) -> Tensor:
    """2x2 stride-2 max pooling; ties route gradient to the first element
    in row-major window order."""
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ContractViolation(f"max_pool_2x2 requires even H and W, got {h}x{w}")
    out_data, idx = kernels.maxpool2x2_forward(x.data)

    def backward(g):
        x.accumulate(kernels.maxpool2x2_backward(idx, g, h, w))

    return Tensor._result(out_data, (x,), backward)


def row_wise_max_pool(x: Tensor) -> Tensor:
    """Max over columns per row: [N,C,H,W] -> [N,C,H,1]; gradient goes to
    the lowest-index argmax column."""
    if x.ndim != 4:
        raise ContractViolation(f"row_wise_max_pool expects [N,C,H,W], got {x.shape}")
    w = x.shape[3]
    out_data, idx = kernels.rowmax_forward(x.data)

    def backward(g):
        x.accumulate(kernels.rowmax_backward(idx, g, w))

    return Tensor._result(out_data, (x,), backward)


def _bn_axes(shape: tuple[int, ...]) -> tuple[int, ...]:
    if len(shape) == 4:
        return (0, 2, 3)
    if len(shape) == 2:
        return (0,)
    raise ContractViolation(f"batch_norm expects [N,C,H,W] or [N,F], got {shape}")


def batch_norm(x: Tensor, params: BatchNormParams, training: bool) -> Tensor:
    """Per-channel batch normalization.

    Training normalizes by batch statistics (biased variance) and updates the
    running stats with factor `momentum` (unbiased variance, as the reference
    implementations do); eval normalizes by the running stats.
    """
    axes = _bn_axes(x.shape)
    c = x.shape[1]
    if params.gamma.shape != (c,):
        raise ContractViolation(f"gamma has shape {params.gamma.shape}, expected ({c},)")
    expand = (1, c, 1, 1) if x.ndim == 4 else (1, c)
    gamma, beta = params.gamma, params.beta
    g_exp = gamma.data.reshape(expand)
    b_exp = beta.data.reshape(expand)

    if training:
        m = x.size // c
        if m < 2:
            raise ContractViolation("batch_norm training needs >=2 values per channel")
        mean = x.data.mean(axis=axes, keepdims=True)
        var = x.data.var(axis=axes, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + params.eps)
        xhat = (x.data - mean) * inv_std
        out_data = g_exp * xhat + b_exp

        mom = params.momentum
        unbiased = var.reshape(c) * (m / (m - 1))
        params.running_mean[...] = (1 - mom) * params.running_mean + mom * mean.reshape(c)
        params.running_var[...] = (1 - mom) * params.running_var + mom * unbiased
        params.num_batches += 1

        def backward(g):
            dxhat = g * g_exp
            s1 = dxhat.sum(axis=axes, keepdims=True)
            s2 = (dxhat * xhat).sum(axis=axes, keepdims=True)
            x.accumulate(inv_std * (dxhat - s1 / m - xhat * s2 / m))
            gamma.accumulate((g * xhat).sum(axis=axes))
            beta.accumulate(g.sum(axis=axes))

        return Tensor._result(out_data, (x, gamma, beta), backward)

    if params.num_batches == 0:
        log.warning("batch_norm eval before any training batch; using (0,1) init stats")
    inv_std = (1.0 / np.sqrt(params.running_var + params.eps)).reshape(expand)
    mean = params.running_mean.reshape(expand)
    xhat = (x.data - mean) * inv_std
    out_data = g_exp * xhat + b_exp

    def backward_eval(g):
        x.accumulate(g * g_exp * inv_std)
        gamma.accumulate((g * xhat).sum(axis=axes))
        beta.accumulate(g.sum(axis=axes))

    return Tensor._result(out_data, (x, gamma, beta), backward_eval)


def dropout(x: Tensor, params: DropoutParams, training: bool,
            rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: train zeroes with probability `rate` and rescales
    survivors by 1/(1-rate); eval is the identity."""
    if not training or params.rate == 0.0:
        def backward_id(g):
            x.accumulate(g)
        return Tensor._result(x.data, (x,), backward_id)

    if rng is None:
        rng = np.random.default_rng(params.rng_seed)
    keep = 1.0 - params.rate
    mask = (rng.random(x.shape) < keep).astype(x.dtype) / keep

    def backward(g):
        x.accumulate(g * mask)

    return Tensor._result(x.data * mask, (x,), backward)


def fully_connected(x: Tensor, weights: Tensor, bias: Tensor) -> Tensor:
    """Affine map y = x W^T + b with weights [F_out, F_in]."""
    if x.ndim != 2:
        raise ContractViolation(f"fully_connected expects [N,F], got {x.shape}")
    if x.shape[1] != weights.shape[1]:
        raise ContractViolation(
            f"input features {x.shape[1]} != weight fan-in {weights.shape[1]}")
    w, b = weights, bias
    out_data = x.data @ w.data.T + b.data

    def backward(g):
        x.accumulate(g @ w.data)
        w.accumulate(g.T @ x.data)
        b.accumulate(g.sum(axis=0))

    return Tensor._result(out_data, (x, w, b), backward)


def softmax(x: Tensor) -> Tensor:
    """Row-wise softmax (stable, shift-invariant)."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        inner = (g * p).sum(axis=-1, keepdims=True)
        x.accumulate(p * (g - inner))

    return Tensor._result(p, (x,), backward)


def softmax_cross_entropy(logits: Tensor, target: np.ndarray) -> tuple[Tensor, np.ndarray]:
    """Mean cross-entropy of row-softmax against one-hot targets.

    Returns (scalar loss tensor, probabilities array). Stable via
    log-sum-exp; target rows must be one-hot.
    """
    target = np.asarray(target)
    if logits.shape != target.shape:
        raise ContractViolation(
            f"logits {logits.shape} vs target {target.shape} shape mismatch")
    row_sums = target.sum(axis=1)
    if not (np.allclose(row_sums, 1.0) and np.all((target == 0) | (target == 1))):
        raise ContractViolation("target rows must be one-hot")
    n = logits.shape[0]
    z = logits.data
    zmax = z.max(axis=1, keepdims=True)
    shifted = z - zmax
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted - lse
    probs = np.exp(log_p)
    loss_val = -(target * log_p).sum() / n

    def backward(g):
        logits.accumulate(g * (probs - target) / n)

    loss = Tensor._result(np.asarray(loss_val, dtype=z.dtype), (logits,), backward)
    return loss, probs
