"""
Fast Lagrangian variation under a general distance constraint.

Both points ascend

    ||h(x1) - h(x2)||_2 - tau * (max(0, d(x1, x) - eps) + max(0, d(x2, x) - eps))

with tau growing from 1 to 10 and the step length (measured in d) decaying
from eps to eps/10. The constraint is soft, so witnesses may end slightly
outside the eps-ball of d; the final distances are reported.
"""

import numpy as np
import structlog

from atvr.core.errors import InvalidInputError
from atvr.core.numerics import RandomSource
from atvr.core.types import VariationEstimate
from atvr.models.base import Model, features
from atvr.variation.distances import Distance
from atvr.variation.pgd import feature_distance_and_grads

logger = structlog.get_logger(__name__)

INIT_SCALE = 0.01
PROBE = 0.1


def _normalize(grad: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(grad, axis=1, keepdims=True)
    return np.where(norms > 0, grad / np.where(norms > 0, norms, 1.0), 0.0)


def _penalty_grad(distance: Distance, points: np.ndarray, anchors: np.ndarray, eps: float) -> np.ndarray:
    """Gradient of max(0, d(points, anchors) - eps) w.r.t. points."""
    violated = distance(points, anchors) > eps
    return np.where(violated[:, None], distance.grad(points, anchors), 0.0)


def _step(distance: Distance, points: np.ndarray, direction: np.ndarray, eta: float) -> np.ndarray:
    """Move eta in d along direction, using d's slope along it."""
    slope = distance(points, points + PROBE * direction) / PROBE
    scale = np.where(slope > 0, eta / np.where(slope > 0, slope, 1.0), 0.0)
    return points + scale[:, None] * direction


def fast_lpv_batch(
    model: Model,
    distance: Distance,
    x: np.ndarray,
    eps: float,
    steps: int,
    rng: RandomSource,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Returns:
        (values (m,), x1 (m, n), x2 (m, n))

    Raises:
        InvalidDistanceError: If d returns a negative or non-finite value
    """
    if eps < 0 or steps < 0:
        raise InvalidInputError("eps and steps must be non-negative", {"eps": eps, "steps": steps})
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    x1 = x + INIT_SCALE * rng.substream(0).normal(x.shape)
    x2 = x + INIT_SCALE * rng.substream(1).normal(x.shape)

    for i in range(1, steps + 1):
        tau = 10.0 ** (i / steps)
        eta = eps * 0.1 ** (i / steps)
        _, g1, g2 = feature_distance_and_grads(model, x1, x2)
        g1 = g1 - tau * _penalty_grad(distance, x1, x, eps)
        g2 = g2 - tau * _penalty_grad(distance, x2, x, eps)
        delta1 = _normalize(g1)
        delta2 = _normalize(g2)
        x1, x2 = _step(distance, x1, delta1, eta), _step(distance, x2, delta2, eta)

    values, _, _ = feature_distance_and_grads(model, x1, x2)
    return values, x1, x2


def fast_lpv(
    model: Model,
    distance: Distance,
    x: np.ndarray,
    eps: float,
    steps: int,
    rng: RandomSource,
) -> VariationEstimate:
    """Fast-LPV at one anchor; `distances` holds (d(x1, x), d(x2, x))."""
    x = np.asarray(x, dtype=np.float64)
    _, x1, x2 = fast_lpv_batch(model, distance, x[None, :], eps, steps, rng)
    value = float(np.linalg.norm(features(model, x1[0]) - features(model, x2[0])))
    d1 = float(distance(x1[0], x))
    d2 = float(distance(x2[0], x))
    logger.debug("Fast-LPV", distance=distance.name, eps=eps, steps=steps, value=value)
    return VariationEstimate(value=value, x1=x1[0], x2=x2[0], method="fast_lpv", distances=(d1, d2))
