"""
Variation by simultaneous projected ascent.

Both points start from independent uniform draws in the ball and take
ascent steps on ||h(x1) - h(x2)||_2 together, each projected back onto the
ball. The reported value is the one at the final iterate, maximized over
restarts; `track_best` reports the best iterate seen instead.

On linf and l1 balls every restart also seeds antipodal vertex pairs
(v, 2x - v); sign ascent from there settles on a nearby vertex pair.

All starts of a row come from that row's sample stream and are run
together as one stacked batch.
"""

from collections.abc import Sequence

import numpy as np
import structlog

from atvr.attacks.config import AttackConfig
from atvr.attacks.pgd import sample_streams
from atvr.core.errors import NumericError
from atvr.core.numerics import RandomSource
from atvr.core.types import VariationEstimate
from atvr.models.base import Model, batch_features, feature_backward, features
from atvr.threats.base import Ball
from atvr.threats.projection import ascent_direction, boundary_sample, clip_to_box, project, random_init

logger = structlog.get_logger(__name__)

# Upper bound on stacked starts per ascent pass.
_MAX_STACKED_STARTS = 16384


def feature_distance_and_grads(
    model: Model, x1: np.ndarray, x2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Row-wise ||h(x1) - h(x2)||_2 and its gradients w.r.t. x1 and x2.

    Rows with coinciding features get zero gradients.
    """
    f1, _ = batch_features(model, x1)
    f2, _ = batch_features(model, x2)
    diff = f1 - f2
    values = np.linalg.norm(diff, axis=1)
    if not np.all(np.isfinite(values)):
        raise NumericError("Non-finite feature distance")
    safe = np.where(values > 0, values, 1.0)
    unit = np.where(values[:, None] > 0, diff / safe[:, None], 0.0)
    g1, _ = feature_backward(model, x1, unit, need_params=False)
    g2, _ = feature_backward(model, x2, -unit, need_params=False)
    return values, g1, g2


def _constrain(points: np.ndarray, anchors: np.ndarray, ball: Ball, cfg: AttackConfig) -> np.ndarray:
    out = project(points, anchors, ball)
    if cfg.clip_box is not None:
        out = clip_to_box(out, *cfg.clip_box)
    return out


def _row_starts(
    anchor: np.ndarray, ball: Ball, cfg: AttackConfig, stream: RandomSource
) -> tuple[np.ndarray, np.ndarray]:
    """Starting pairs for one anchor, restart by restart: (x1 (S, n), x2 (S, n))."""
    vertices = cfg.vertex_starts_for(ball) if cfg.random_init else 0
    firsts: list[np.ndarray] = []
    seconds: list[np.ndarray] = []
    for _ in range(cfg.restarts):
        if cfg.random_init:
            firsts.append(random_init(anchor, ball, stream))
            seconds.append(random_init(anchor, ball, stream))
        else:
            firsts.append(anchor.copy())
            seconds.append(anchor.copy())
        for _ in range(vertices):
            vertex = boundary_sample(anchor, ball, stream)
            firsts.append(vertex)
            seconds.append(2.0 * anchor - vertex)
    return np.stack(firsts), np.stack(seconds)


def _ascend(
    model: Model, anchors: np.ndarray, x1: np.ndarray, x2: np.ndarray, ball: Ball, cfg: AttackConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run every stacked start; per-start (values, x1, x2) at the final or best iterate."""
    step = cfg.step_for(ball)
    x1 = _constrain(x1, anchors, ball, cfg)
    x2 = _constrain(x2, anchors, ball, cfg)
    values, g1, g2 = feature_distance_and_grads(model, x1, x2)
    best_values, best_x1, best_x2 = values.copy(), x1.copy(), x2.copy()
    for _ in range(cfg.steps):
        x1_next = _constrain(x1 + step * ascent_direction(g1, ball.p), anchors, ball, cfg)
        x2 = _constrain(x2 + step * ascent_direction(g2, ball.p), anchors, ball, cfg)
        x1 = x1_next
        values, g1, g2 = feature_distance_and_grads(model, x1, x2)
        if cfg.track_best:
            better = values > best_values
            best_values[better] = values[better]
            best_x1[better] = x1[better]
            best_x2[better] = x2[better]
    if not cfg.track_best:
        return values, x1, x2
    return best_values, best_x1, best_x2


def variation_pgd_batch(
    model: Model,
    x: np.ndarray,
    ball: Ball,
    cfg: AttackConfig,
    rng: RandomSource | None = None,
    sample_ids: Sequence[int] | np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-row variation estimates for a batch of anchors.

    Row i draws its starts from rng.for_sample(sample_ids[i]) (the row
    position by default), so it matches variation_pgd with that sample index.
    Earlier starts win ties.

    Returns:
        (values (m,), x1 witnesses (m, n), x2 witnesses (m, n))
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    rows, n = x.shape
    if ball.eps == 0.0:
        return np.zeros(rows), x.copy(), x.copy()

    root = rng if rng is not None else RandomSource(cfg.seed)
    streams = sample_streams(root, rows, sample_ids)
    starts = cfg.restarts * (1 + (cfg.vertex_starts_for(ball) if cfg.random_init else 0))
    chunk = max(1, _MAX_STACKED_STARTS // starts)

    best_values = np.empty(rows)
    best_x1 = np.empty_like(x)
    best_x2 = np.empty_like(x)
    for lo in range(0, rows, chunk):
        hi = min(rows, lo + chunk)
        pairs = [_row_starts(x[i], ball, cfg, streams[i]) for i in range(lo, hi)]
        x1 = np.concatenate([p[0] for p in pairs])
        x2 = np.concatenate([p[1] for p in pairs])
        anchors = np.repeat(x[lo:hi], starts, axis=0)
        values, x1, x2 = _ascend(model, anchors, x1, x2, ball, cfg)

        values = values.reshape(hi - lo, starts)
        pick = np.argmax(values, axis=1)
        flat = np.arange(hi - lo) * starts + pick
        best_values[lo:hi] = values[np.arange(hi - lo), pick]
        best_x1[lo:hi] = x1[flat].reshape(hi - lo, n)
        best_x2[lo:hi] = x2[flat].reshape(hi - lo, n)

    return best_values, best_x1, best_x2


def variation_pgd(
    model: Model,
    x: np.ndarray,
    ball: Ball,
    cfg: AttackConfig,
    rng: RandomSource | None = None,
    sample_index: int = 0,
) -> VariationEstimate:
    """
    Lower estimate of max ||h(x1) - h(x2)||_2 over x1, x2 in the ball around x.

    eps=0 gives value 0 with witnesses (x, x). With the same rng,
    sample_index=i reproduces row i of variation_pgd_batch.
    """
    x = np.asarray(x, dtype=np.float64)
    _, x1, x2 = variation_pgd_batch(model, x[None, :], ball, cfg, rng, sample_ids=[sample_index])
    value = float(np.linalg.norm(features(model, x1[0]) - features(model, x2[0])))
    logger.debug("Variation PGD", p=ball.p.value, eps=ball.eps, restarts=cfg.restarts, value=value)
    return VariationEstimate(value=value, x1=x1[0], x2=x2[0], method="pgd")
