"""First-order update rules over named numpy arrays."""
from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..utils import Optimizer


class BaseOptimizer(ABC):
    """In-place optimizer over a dict of arrays."""

    def __init__(self, learning_rate: float) -> None:
        """Store the step size."""
        self.learning_rate = learning_rate

    @abstractmethod
    def direction(self, name: str, grad: np.ndarray) -> np.ndarray:
        """Return the update direction for one array."""

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        """Apply one descent step to every array that has a gradient."""
        self.tick()
        for name, grad in grads.items():
            params[name] -= self.learning_rate * self.direction(name, grad)

    def tick(self) -> None:
        """Advance the step counter."""


class SGD(BaseOptimizer):
    """Plain gradient descent."""

    def direction(self, name: str, grad: np.ndarray) -> np.ndarray:
        """Return the raw gradient."""
        return grad


class Adam(BaseOptimizer):
    """Adam with bias correction."""

    def __init__(
        self,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        """Set up empty moment estimates."""
        super().__init__(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def tick(self) -> None:
        """Advance the step counter."""
        self.t += 1

    def direction(self, name: str, grad: np.ndarray) -> np.ndarray:
        """Return the bias-corrected moment ratio."""
        if self.t == 0:
            self.t = 1
        m = self.m.get(name, np.zeros_like(grad))
        v = self.v.get(name, np.zeros_like(grad))
        m = self.beta1 * m + (1 - self.beta1) * grad
        v = self.beta2 * v + (1 - self.beta2) * grad**2
        self.m[name], self.v[name] = m, v
        m_hat = m / (1 - self.beta1**self.t)
        v_hat = v / (1 - self.beta2**self.t)
        return m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(kind: Optimizer, learning_rate: float) -> BaseOptimizer:
    """Create the optimizer named by the enum."""
    if kind is Optimizer.ADAM:
        return Adam(learning_rate)
    return SGD(learning_rate)
