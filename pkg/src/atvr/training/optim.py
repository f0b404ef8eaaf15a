"""SGD with momentum over named parameter arrays."""

import numpy as np

from atvr.core.errors import InvalidInputError


class SGDMomentum:
    """
    Heavy-ball SGD: buf = momentum * buf + grad, param -= lr * buf.

    The first step initializes the buffer with the gradient.
    """

    def __init__(self, learning_rate: float, momentum: float = 0.9):
        if learning_rate <= 0 or not 0 <= momentum < 1:
            raise InvalidInputError(
                "Invalid optimizer settings", {"learning_rate": learning_rate, "momentum": momentum}
            )
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.buffers: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """Updated copies of params."""
        updated = {}
        for name, value in params.items():
            grad = grads[name]
            buf = self.buffers.get(name)
            buf = grad.copy() if buf is None else self.momentum * buf + grad
            self.buffers[name] = buf
            updated[name] = value - self.learning_rate * buf
        return updated
