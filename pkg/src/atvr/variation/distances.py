"""Differentiable input-space distances for Fast-LPV."""

from abc import ABC, abstractmethod

import numpy as np

from atvr.core.errors import InvalidDistanceError, InvalidInputError
from atvr.core.numerics import RandomSource


class Distance(ABC):
    """
    A distance d(a, b) over the last axis, with its gradient in a.

    Inputs may be single vectors or (m, n) batches.
    """

    name: str = "distance"

    @abstractmethod
    def _value(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def grad(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ...

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """
        Raises:
            InvalidDistanceError: If any value is negative or non-finite
        """
        values = np.asarray(self._value(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)))
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidDistanceError(
                f"Distance '{self.name}' returned an invalid value",
                {"values": np.atleast_1d(values)[:5].tolist()},
            )
        return values


def _unit_rows(diff: np.ndarray, norms: np.ndarray) -> np.ndarray:
    safe = np.where(norms > 0, norms, 1.0)
    return np.where(norms[..., None] > 0, diff / safe[..., None], 0.0)


class L2Distance(Distance):
    name = "l2"

    def _value(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.linalg.norm(a - b, axis=-1)

    def grad(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
        return _unit_rows(diff, np.linalg.norm(diff, axis=-1))


class RandomLinearDistance(Distance):
    """
    Toy perceptual distance d(a, b) = ||M (a - b)||_2 for a fixed random map M
    with N(0, 1/out_dim) entries.
    """

    name = "random_linear"

    def __init__(self, input_dim: int, out_dim: int = 16, seed: int = 0, matrix: np.ndarray | None = None):
        if matrix is None:
            if input_dim < 1 or out_dim < 1:
                raise InvalidInputError("Distance map dimensions must be positive")
            matrix = RandomSource(seed).normal((out_dim, input_dim), 1.0 / np.sqrt(out_dim))
        self.matrix = np.asarray(matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[1] != input_dim:
            raise InvalidInputError("Distance map must be (out_dim, input_dim)")

    def _value(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.linalg.norm((a - b) @ self.matrix.T, axis=-1)

    def grad(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        mapped = (np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) @ self.matrix.T
        return _unit_rows(mapped, np.linalg.norm(mapped, axis=-1)) @ self.matrix


def build_distance(name: str, input_dim: int, seed: int = 0, out_dim: int = 16) -> Distance:
    if name == "l2":
        return L2Distance()
    if name == "random_linear":
        return RandomLinearDistance(input_dim, out_dim=out_dim, seed=seed)
    raise InvalidInputError(f"Unknown distance: {name}", {"available": ["l2", "random_linear"]})
