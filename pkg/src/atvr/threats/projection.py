"""
Euclidean projections onto l_p balls, membership tests and random
initialization.

Every function accepts a single vector of shape (n,) or a batch of shape
(m, n); batches are processed row by row with identical results.
"""

from collections.abc import Sequence

import numpy as np

from atvr.core.errors import InvalidInputError
from atvr.core.numerics import RandomSource
from atvr.threats.base import Ball, Norm, ThreatModel

# Points already within eps*(1 + _INSIDE_RTOL) are returned untouched, which
# makes projection idempotent bit for bit.
_INSIDE_RTOL = 1e-12
_INSIDE_ATOL = 1e-15


def _check_shapes(v: np.ndarray, anchor: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=np.float64)
    anchor = np.asarray(anchor, dtype=np.float64)
    if v.shape[-1] != anchor.shape[-1] or (anchor.ndim == 2 and anchor.shape != v.shape):
        raise InvalidInputError(
            "Point and anchor dimensions differ", {"point": v.shape, "anchor": anchor.shape}
        )
    return v, anchor


def lp_norm(delta: np.ndarray, p: Norm) -> np.ndarray:
    """Norm over the last axis."""
    if p is Norm.LINF:
        return np.max(np.abs(delta), axis=-1)
    if p is Norm.L2:
        return np.linalg.norm(delta, axis=-1)
    return np.sum(np.abs(delta), axis=-1)


def _project_l1(delta: np.ndarray, eps: float) -> np.ndarray:
    """Sort-and-threshold projection of each row onto the l1 ball of radius eps."""
    magnitude = np.abs(delta)
    ordered = -np.sort(-magnitude, axis=-1)
    cumulative = np.cumsum(ordered, axis=-1)
    ranks = np.arange(1, delta.shape[-1] + 1)
    active = ordered - (cumulative - eps) / ranks > 0
    # Index of the last active coordinate per row (active is a prefix).
    rho = np.sum(active, axis=-1) - 1
    rows = np.arange(delta.shape[0])
    theta = (cumulative[rows, rho] - eps) / (rho + 1)
    return np.sign(delta) * np.maximum(magnitude - theta[:, None], 0.0)


def project(v: np.ndarray, anchor: np.ndarray, ball: Ball) -> np.ndarray:
    """
    Euclidean projection of v onto the ball of radius eps around anchor.

    Exact clip for linf, radial rescale for l2, sort-and-threshold for l1.
    Points already inside the ball are returned unchanged.

    Raises:
        InvalidInputError: On dimension mismatch
    """
    v, anchor = _check_shapes(v, anchor)
    single = v.ndim == 1
    points = np.atleast_2d(v)
    base = np.broadcast_to(anchor, points.shape)
    delta = points - base
    norms = lp_norm(delta, ball.p)
    inside = norms <= ball.eps * (1.0 + _INSIDE_RTOL) + _INSIDE_ATOL

    out = points.copy()
    outside = ~inside
    if np.any(outside):
        d_out = delta[outside]
        if ball.eps == 0.0:
            projected = np.zeros_like(d_out)
        elif ball.p is Norm.LINF:
            projected = np.clip(d_out, -ball.eps, ball.eps)
        elif ball.p is Norm.L2:
            projected = d_out * (ball.eps / norms[outside])[:, None]
        else:
            projected = _project_l1(d_out, ball.eps)
        out[outside] = base[outside] + projected
    return out[0] if single else out


def contains_rows(v: np.ndarray, anchor: np.ndarray, tm: ThreatModel | Ball, tol: float = 0.0) -> np.ndarray:
    """Row-wise membership: True where some member has ||v - anchor||_p <= eps + tol."""
    v, anchor = _check_shapes(v, anchor)
    members = [tm] if isinstance(tm, Ball) else tm.members
    delta = np.atleast_2d(v) - anchor
    result = np.zeros(delta.shape[0], dtype=bool)
    for ball in members:
        result |= lp_norm(delta, ball.p) <= ball.eps + tol
    return result


def contains(v: np.ndarray, anchor: np.ndarray, tm: ThreatModel | Ball, tol: float = 0.0) -> bool:
    """True iff some member ball contains v within tolerance."""
    return bool(np.all(contains_rows(v, anchor, tm, tol)))


def random_init(anchor: np.ndarray, ball: Ball, rng: RandomSource) -> np.ndarray:
    """
    Uniform start inside the ball: project(anchor + U(-eps, eps)^n).

    Works for a single anchor or a batch of anchors (one draw per row).
    """
    anchor = np.asarray(anchor, dtype=np.float64)
    noise = rng.uniform(-ball.eps, ball.eps, anchor.shape)
    return project(anchor + noise, anchor, ball)


def boundary_sample(anchor: np.ndarray, ball: Ball, rng: RandomSource) -> np.ndarray:
    """
    A random point on the ball's extreme set: a random vertex for linf and l1,
    a random direction at radius eps for l2.
    """
    anchor = np.asarray(anchor, dtype=np.float64)
    shape = anchor.shape
    if ball.p is Norm.LINF:
        signs = np.where(rng.uniform(0.0, 1.0, shape) < 0.5, -1.0, 1.0)
        return anchor + ball.eps * signs
    if ball.p is Norm.L2:
        direction = rng.normal(shape)
        norms = np.linalg.norm(np.atleast_2d(direction), axis=-1)
        norms = np.where(norms > 0, norms, 1.0)
        scaled = np.atleast_2d(direction) * (ball.eps / norms)[:, None]
        return anchor + (scaled[0] if anchor.ndim == 1 else scaled)

    n = shape[-1]
    rows = 1 if anchor.ndim == 1 else shape[0]
    coords = rng.integers(0, n, rows)
    signs = np.where(rng.uniform(0.0, 1.0, rows) < 0.5, -1.0, 1.0)
    delta = np.zeros((rows, n))
    delta[np.arange(rows), coords] = signs * ball.eps
    return anchor + (delta[0] if anchor.ndim == 1 else delta)


def ascent_direction(grad: np.ndarray, p: Norm) -> np.ndarray:
    """
    Step direction for projected ascent: sign for linf, l2-normalized gradient
    for l1 and l2. Zero gradients give zero steps.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if p is Norm.LINF:
        return np.sign(grad)
    norms = np.linalg.norm(np.atleast_2d(grad), axis=-1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    direction = np.atleast_2d(grad) / safe
    return direction[0] if grad.ndim == 1 else direction


def clip_to_box(v: np.ndarray, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """Coordinatewise clip to [low, high]."""
    return np.clip(v, low, high)


def random_init_rows(anchors: np.ndarray, ball: Ball, streams: Sequence[RandomSource]) -> np.ndarray:
    """random_init per row, each row drawing from its own stream."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=np.float64))
    if len(streams) != anchors.shape[0]:
        raise InvalidInputError(
            "One stream per anchor row is required", {"rows": anchors.shape[0], "streams": len(streams)}
        )
    return np.stack([random_init(a, ball, s) for a, s in zip(anchors, streams)])
