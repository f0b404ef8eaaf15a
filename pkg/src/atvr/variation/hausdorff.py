"""
Directed Hausdorff distance in feature space between two threat models:

    H(x) = max_{x1 in T(x)} min_{x2 in S(x)} ||h(x1) - h(x2)||_2

The outer max is projected ascent on x1 using the gradient at the inner
minimizer. The inner min is projected descent on x2 from several starts:
the projection of x1 onto each source ball, the anchor itself and random
draws. Because the anchor is always a candidate, the estimate never exceeds
max_{x1} ||h(x1) - h(x)||, which is at most the target variation.
"""

from dataclasses import dataclass

import numpy as np
import structlog

from atvr.attacks.config import AttackConfig
from atvr.core.numerics import RandomSource
from atvr.models.base import Model, batch_features, feature_backward
from atvr.threats.base import Ball, ThreatModel
from atvr.threats.projection import (
    ascent_direction,
    boundary_sample,
    project,
    random_init,
)
from atvr.utils.parallel import parallel_map

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class HausdorffConfig:
    inner_steps: int = 20
    inner_restarts: int = 5
    samples: int = 16


class _InnerMin:
    """min over the source threat model of ||f1 - h(x2)||_2 for a fixed anchor."""

    def __init__(
        self, model: Model, x: np.ndarray, source: list[Ball], hcfg: HausdorffConfig, rng: RandomSource
    ):
        self.model = model
        self.x = x
        self.source = source
        self.steps = hcfg.inner_steps
        # Random starts are drawn once and shared by every outer iterate.
        self.random_starts = [
            np.stack([random_init(x, ball, rng.substream(j, r)) for r in range(hcfg.inner_restarts)])
            if hcfg.inner_restarts > 0 and ball.eps > 0
            else np.empty((0, x.shape[0]))
            for j, ball in enumerate(source)
        ]

    def __call__(self, x1: np.ndarray) -> tuple[float, np.ndarray]:
        """Smallest feature distance found and the feature vector attaining it."""
        f1, _ = batch_features(self.model, x1[None, :])
        best = np.inf
        best_feat = f1[0]
        for ball, extra in zip(self.source, self.random_starts):
            candidates = np.vstack([project(x1, self.x, ball)[None, :], self.x[None, :], extra])
            anchors = np.broadcast_to(self.x, candidates.shape)
            step = ball.eps / 9.0
            for k in range(self.steps + 1):
                f2, _ = batch_features(self.model, candidates)
                diff = f1 - f2
                dists = np.linalg.norm(diff, axis=1)
                i = int(np.argmin(dists))
                if dists[i] < best:
                    best, best_feat = float(dists[i]), f2[i]
                if k == self.steps or ball.eps == 0.0 or best == 0.0:
                    break
                safe = np.where(dists > 0, dists, 1.0)
                unit = np.where(dists[:, None] > 0, diff / safe[:, None], 0.0)
                # d/dx2 ||f1 - h(x2)|| = -J^T unit; descend.
                grad, _ = feature_backward(self.model, candidates, -unit, need_params=False)
                candidates = project(candidates - step * ascent_direction(grad, ball.p), anchors, ball)
        return best, best_feat


def _outer_value_and_grad(
    model: Model, inner: _InnerMin, x1: np.ndarray
) -> tuple[float, np.ndarray]:
    value, feat2 = inner(x1)
    f1, _ = batch_features(model, x1[None, :])
    if value == 0.0:
        return value, np.zeros_like(x1)
    unit = (f1 - feat2) / value
    grad, _ = feature_backward(model, x1[None, :], unit, need_params=False)
    return value, grad[0]


def hausdorff_estimate(
    model: Model,
    x: np.ndarray,
    source: ThreatModel | Ball,
    target: ThreatModel | Ball,
    cfg: AttackConfig,
    hcfg: HausdorffConfig | None = None,
    rng: RandomSource | None = None,
) -> float:
    """
    Estimate of the feature-space directed Hausdorff distance from the target
    neighborhood of x to the source neighborhood.

    The caller is responsible for source being contained in target.
    """
    hcfg = hcfg or HausdorffConfig()
    x = np.asarray(x, dtype=np.float64)
    root = rng if rng is not None else RandomSource(cfg.seed)
    source_members = [source] if isinstance(source, Ball) else list(source.members)
    target_members = [target] if isinstance(target, Ball) else list(target.members)
    inner = _InnerMin(model, x, source_members, hcfg, root.substream(0))

    best = 0.0
    for index, ball in enumerate(target_members):
        if ball.eps == 0.0:
            best = max(best, inner(x)[0])
            continue
        stream = root.substream(1, index)
        step = cfg.step_for(ball)

        # Extreme points of the target ball, used as a sampling refinement.
        for s in range(hcfg.samples):
            best = max(best, inner(boundary_sample(x, ball, stream.substream(0, s)))[0])

        for restart in range(cfg.restarts):
            start_stream = stream.substream(1, restart)
            # The first restart starts from an extreme point, where flat
            # directions (coordinates still inside the source) cannot stall it.
            if restart == 0:
                x1 = project(boundary_sample(x, ball, start_stream), x, ball)
            else:
                x1 = random_init(x, ball, start_stream)
            for _ in range(cfg.steps):
                value, grad = _outer_value_and_grad(model, inner, x1)
                best = max(best, value)
                x1 = project(x1 + step * ascent_direction(grad, ball.p), x, ball)
            best = max(best, inner(x1)[0])

    logger.debug("Hausdorff estimate", source=source.label, target=target.label, value=best)
    return best


def dataset_hausdorff(
    model: Model,
    x: np.ndarray,
    source: ThreatModel | Ball,
    target: ThreatModel | Ball,
    cfg: AttackConfig,
    hcfg: HausdorffConfig | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Per-sample Hausdorff estimates, sample i drawing from substream i."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    root = RandomSource(cfg.seed)
    values = parallel_map(
        lambda i: hausdorff_estimate(model, x[i], source, target, cfg, hcfg, root.for_sample(i)),
        range(x.shape[0]),
        threads=threads,
    )
    return np.asarray(values, dtype=np.float64)
