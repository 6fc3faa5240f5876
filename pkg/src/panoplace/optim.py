"""SGD with momentum and coupled L2 weight decay.

Update rule per parameter p with gradient g:

    v <- momentum * v - lr * (g + weight_decay * p)
    p <- p + v

Weight decay is added to the gradient (coupled formulation) and applies to
every trainable parameter handed to the optimizer.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .autodiff import Tensor
from .errors import ContractViolation


class SGD:
    def __init__(self, params: Iterable[Tensor], lr: float = 1e-4,
                 momentum: float = 0.9, weight_decay: float = 5e-4):
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        for p, v in zip(self.params, self.velocity):
            g = p.grad
            if g is None:
                g = np.zeros_like(p.data)
            if g.shape != p.data.shape:
                raise ContractViolation(
                    f"gradient shape {g.shape} != parameter shape {p.data.shape}")
            if self.weight_decay:
                g = g + self.weight_decay * p.data
            v *= self.momentum
            v -= self.lr * g
            p.data = p.data + v

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
