"""Dense tensors with reverse-mode automatic differentiation.

Define-by-run: every operation on a `Tensor` records a backward closure on
its output, and `backward()` replays the closures in reverse topological
order. The graph is rebuilt on each forward pass; nothing is retained
between passes except parameter tensors themselves.
"""

from __future__ import annotations

import os
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import ContractViolation, StaleGraphError

# Opt-in NaN/Inf guard on every op output (slows things down; debugging only).
_CHECK_FINITE = os.environ.get("PPC_DEBUG_FINITE", "") == "1"

_grad_enabled = True


class no_grad:
    """Context manager that disables graph recording (inference mode)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def grad_enabled() -> bool:
    return _grad_enabled


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """N-dimensional real array participating in the autodiff graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_backward_done")

    def __init__(self, data, requires_grad: bool = False,
                 _parents: tuple["Tensor", ...] = ()):
        self.data = np.asarray(data)
        if self.data.dtype.kind != "f":
            self.data = self.data.astype(np.float64)
        if _CHECK_FINITE and not np.all(np.isfinite(self.data)):
            raise FloatingPointError("non-finite values in tensor data")
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward: Callable[[], None] | None = None
        self._backward_done = False

    # -- graph construction -------------------------------------------------

    @staticmethod
    def _result(data: np.ndarray, parents: tuple["Tensor", ...],
                backward: Callable[[np.ndarray], None]) -> "Tensor":
        """Build an op output, recording `backward` if grads are live.

        `backward` receives the output gradient and is responsible for
        accumulating into each parent via `parent.accumulate(g)`.
        """
        requires = _grad_enabled and any(p.requires_grad for p in parents)
        out = Tensor(data, requires_grad=requires,
                     _parents=parents if requires else ())
        if requires:
            def closure():
                backward(out.grad)
            out._backward = closure
        return out

    def accumulate(self, grad: np.ndarray) -> None:
        """Add a gradient contribution (no-op for non-grad tensors)."""
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad = self.grad + grad

    def zero_grad(self) -> None:
        self.grad = None

    # -- properties ----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _wrap(other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(np.asarray(other))

    def __add__(self, other) -> "Tensor":
        other = self._wrap(other)

        def backward(g):
            self.accumulate(_unbroadcast(g, self.shape))
            other.accumulate(_unbroadcast(g, other.shape))
        return self._result(self.data + other.data, (self, other), backward)

    __radd__ = __add__

    def __mul__(self, other) -> "Tensor":
        other = self._wrap(other)

        def backward(g):
            self.accumulate(_unbroadcast(g * other.data, self.shape))
            other.accumulate(_unbroadcast(g * self.data, other.shape))
        return self._result(self.data * other.data, (self, other), backward)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        def backward(g):
            self.accumulate(-g)
        return self._result(-self.data, (self,), backward)

    def __sub__(self, other) -> "Tensor":
        return self + (-self._wrap(other))

    def __rsub__(self, other) -> "Tensor":
        return self._wrap(other) + (-self)

    def __truediv__(self, scalar) -> "Tensor":
        if isinstance(scalar, Tensor):
            raise ContractViolation("tensor/tensor division is not supported")
        inv = 1.0 / float(scalar)
        return self * inv

    def matmul(self, other: "Tensor") -> "Tensor":
        other = self._wrap(other)
        if self.ndim != 2 or other.ndim != 2:
            raise ContractViolation("matmul expects 2-D tensors")

        def backward(g):
            self.accumulate(g @ other.data.T)
            other.accumulate(self.data.T @ g)
        return self._result(self.data @ other.data, (self, other), backward)

    __matmul__ = matmul

    # -- shape ops -----------------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape

        def backward(g):
            self.accumulate(g.reshape(old))
        return self._result(self.data.reshape(shape), (self,), backward)

    def sum(self, axis=None) -> "Tensor":
        def backward(g):
            if axis is None:
                self.accumulate(np.broadcast_to(g, self.shape))
            else:
                self.accumulate(np.broadcast_to(np.expand_dims(g, axis), self.shape))
        return self._result(self.data.sum(axis=axis), (self,), backward)

    def mean(self, axis=None) -> "Tensor":
        n = self.size if axis is None else self.shape[axis]
        return self.sum(axis=axis) * (1.0 / n)

    # -- nonlinearities --------------------------------------------------------

    def relu(self) -> "Tensor":
        mask = self.data > 0

        def backward(g):
            self.accumulate(g * mask)
        return self._result(np.where(mask, self.data, 0.0), (self,), backward)

    def log(self) -> "Tensor":
        def backward(g):
            self.accumulate(g / self.data)
        return self._result(np.log(self.data), (self,), backward)

    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)

        def backward(g):
            self.accumulate(g * out_data)
        return self._result(out_data, (self,), backward)


def _topo_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Run reverse-mode differentiation from a scalar loss.

    Every tensor with requires_grad reachable from `loss` ends up with its
    accumulated gradient in `.grad`. Calling twice on the same recorded
    graph raises StaleGraphError.
    """
    if loss.size != 1:
        raise ContractViolation(f"backward requires a scalar loss, got shape {loss.shape}")
    if loss._backward_done:
        raise StaleGraphError("backward already ran on this graph; rebuild with a new forward pass")
    loss._backward_done = True
    loss.grad = np.ones_like(loss.data)
    for node in reversed(_topo_order(loss)):
        if node._backward is not None and node.grad is not None:
            node._backward()


Tensor.backward = lambda self: backward(self)


def grad_map(loss: Tensor, params: Iterable[Tensor] | Mapping[str, Tensor]) -> dict:
    """Backward pass returning {param: gradient array}; zeros when unreachable."""
    backward(loss)
    items = params.items() if isinstance(params, Mapping) else ((p, p) for p in params)
    out = {}
    for key, p in items:
        out[key] = p.grad if p.grad is not None else np.zeros_like(p.data)
    return out


def zero_grads(params: Iterable[Tensor] | Mapping[str, Tensor]) -> None:
    values = params.values() if isinstance(params, Mapping) else params
    for p in values:
        p.zero_grad()
