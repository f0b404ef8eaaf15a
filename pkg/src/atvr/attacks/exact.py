"""
Closed-form worst case for binary linear models.

Cross-entropy is decreasing in the margin, and the margin is affine in x, so
the worst case over an l_p ball lowers the margin by eps times the dual norm
of its input gradient.
"""

import numpy as np

from atvr.core.errors import InvalidInputError, UnsupportedModelError
from atvr.models.base import Model, features
from atvr.threats.base import Ball, ThreatModel
from atvr.threats.projection import lp_norm


def require_binary_linear(model: Model) -> None:
    if model.kind != "linear" or model.num_classes != 2:
        raise UnsupportedModelError(
            "Exact adversarial oracle needs a binary linear model",
            {"kind": model.kind, "num_classes": model.num_classes},
        )


def _margin_and_direction(model: Model, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Clean margin mu(x) and its input gradient W^T (a_y - a_other), per row."""
    if np.any((y < 0) | (y > 1)):
        raise InvalidInputError("Binary labels must be 0 or 1")
    A = model.A
    b2 = model.params["b2"]
    other = 1 - y
    a_diff = A[y] - A[other]
    feats = np.atleast_2d(features(model, x))
    margin = np.sum(a_diff * feats, axis=1) + b2[y] - b2[other]
    return margin, a_diff @ model.W


def exact_adv_margin_linear_batch(
    model: Model, x: np.ndarray, y: np.ndarray, tm: ThreatModel | Ball
) -> np.ndarray:
    """
    Worst-case margin per row; for a union, the minimum over members.

    Raises:
        UnsupportedModelError: If the model is not binary and linear
    """
    require_binary_linear(model)
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    margin, direction = _margin_and_direction(model, x, y)
    members = [tm] if isinstance(tm, Ball) else tm.members
    worst = np.full(margin.shape, np.inf)
    for ball in members:
        if ball.eps == 0.0:
            shifted = margin
        else:
            shifted = margin - ball.eps * lp_norm(direction, ball.p.dual)
        worst = np.minimum(worst, shifted)
    return worst


def exact_adv_loss_linear_batch(
    model: Model, x: np.ndarray, y: np.ndarray, tm: ThreatModel | Ball
) -> np.ndarray:
    """Worst-case cross-entropy log(1 + exp(-margin*)) per row."""
    return np.logaddexp(0.0, -exact_adv_margin_linear_batch(model, x, y, tm))


def exact_adv_margin_linear(model: Model, x: np.ndarray, y: int, tm: ThreatModel | Ball) -> float:
    return float(exact_adv_margin_linear_batch(model, np.asarray(x)[None, :], np.array([y]), tm)[0])


def exact_adv_loss_linear(model: Model, x: np.ndarray, y: int, tm: ThreatModel | Ball) -> float:
    """
    Exact maximum of the cross-entropy over the ball (or union) around x.

    Example: W = I, a_y - a_other = (1, 0), clean margin 1 and linf eps 0.1
    give margin 0.9 and loss log(1 + e^-0.9).
    """
    return float(exact_adv_loss_linear_batch(model, np.asarray(x)[None, :], np.array([y]), tm)[0])
