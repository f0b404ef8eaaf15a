"""
Loss-maximizing projected gradient ascent over a threat model.

The batch form is the primitive. Every row draws its starts from the
(sample id, member) substream, restarts in sequence, so a row's result does
not depend on the batch it was attacked in.
"""

from collections.abc import Sequence

import numpy as np
import structlog

from atvr.attacks.config import AttackConfig
from atvr.core.errors import InvalidInputError, NumericError
from atvr.core.numerics import RandomSource
from atvr.models.base import Model
from atvr.models.losses import loss_and_input_grad
from atvr.threats.base import Ball, ThreatModel
from atvr.threats.projection import ascent_direction, clip_to_box, project, random_init_rows

logger = structlog.get_logger(__name__)


def sample_streams(
    root: RandomSource, rows: int, sample_ids: Sequence[int] | np.ndarray | None
) -> list[RandomSource]:
    """
    One stream per row, keyed by sample id (row position when ids are None).

    Raises:
        InvalidInputError: If the ids do not match the batch
    """
    ids = np.arange(rows) if sample_ids is None else np.asarray(sample_ids, dtype=np.int64).reshape(-1)
    if ids.shape[0] != rows:
        raise InvalidInputError("One sample id per row is required", {"rows": rows, "ids": int(ids.shape[0])})
    if np.any(ids < 0):
        raise InvalidInputError("Sample ids must be non-negative")
    return [root.for_sample(int(i)) for i in ids]


def _checked_loss_grad(model: Model, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    losses, grads = loss_and_input_grad(model, x, y)
    if not np.all(np.isfinite(losses)) or not np.all(np.isfinite(grads)):
        raise NumericError("Non-finite loss during attack", {"rows": int(np.sum(~np.isfinite(losses)))})
    return losses, grads


def _constrain(points: np.ndarray, anchors: np.ndarray, ball: Ball, cfg: AttackConfig) -> np.ndarray:
    out = project(points, anchors, ball)
    if cfg.clip_box is not None:
        out = clip_to_box(out, *cfg.clip_box)
    return out


def _keep(
    best_x: np.ndarray, best_loss: np.ndarray, cand_x: np.ndarray, cand_loss: np.ndarray
) -> None:
    """In-place update; ties keep the earlier point."""
    better = cand_loss > best_loss
    best_x[better] = cand_x[better]
    best_loss[better] = cand_loss[better]


def _attack_ball(
    model: Model,
    x: np.ndarray,
    y: np.ndarray,
    ball: Ball,
    cfg: AttackConfig,
    streams: list[RandomSource],
    member_index: int,
    clean_loss: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    best_x = x.copy()
    best_loss = clean_loss.copy() if cfg.keep_best else np.full(x.shape[0], -np.inf)
    step = cfg.step_for(ball)
    member_streams = [s.substream(member_index) for s in streams]

    for _restart in range(cfg.restarts):
        if cfg.random_init:
            current = random_init_rows(x, ball, member_streams)
            current = _constrain(current, x, ball, cfg)
        else:
            current = x.copy()
        losses, grads = _checked_loss_grad(model, current, y)
        if cfg.keep_best:
            _keep(best_x, best_loss, current, losses)

        for _ in range(cfg.steps):
            current = _constrain(current + step * ascent_direction(grads, ball.p), x, ball, cfg)
            losses, grads = _checked_loss_grad(model, current, y)
            if cfg.keep_best:
                _keep(best_x, best_loss, current, losses)

        if not cfg.keep_best:
            _keep(best_x, best_loss, current, losses)

    return best_x, best_loss


def pgd_attack_batch(
    model: Model,
    x: np.ndarray,
    y: np.ndarray,
    tm: ThreatModel | Ball,
    cfg: AttackConfig,
    rng: RandomSource | None = None,
    sample_ids: Sequence[int] | np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    PGD over a batch of inputs.

    Each member ball is attacked separately and the per-row result with the
    largest loss is kept (earlier members win ties). steps=0 or eps=0 returns
    the clean points.

    Args:
        x: Inputs (m, n)
        y: Labels (m,)
        tm: Threat model or single ball
        cfg: Attack parameters
        rng: Random stream; defaults to RandomSource(cfg.seed)
        sample_ids: Per-row stream keys; defaults to the row positions

    Returns:
        (adversarial points (m, n), cross-entropy at those points (m,))

    Raises:
        InvalidInputError: On dimension mismatch
        NumericError: If the loss becomes non-finite
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    if x.shape[0] != y.shape[0]:
        raise InvalidInputError("Inputs and labels disagree on batch size")
    members = [tm] if isinstance(tm, Ball) else tm.members
    root = rng if rng is not None else RandomSource(cfg.seed)
    streams = sample_streams(root, x.shape[0], sample_ids)

    clean_loss, _ = _checked_loss_grad(model, x, y)
    best_x = x.copy()
    best_loss = clean_loss.copy()
    if cfg.steps == 0:
        return best_x, best_loss

    first = True
    for index, ball in enumerate(members):
        if ball.eps == 0.0:
            cand_x, cand_loss = x.copy(), clean_loss.copy()
        else:
            cand_x, cand_loss = _attack_ball(model, x, y, ball, cfg, streams, index, clean_loss)
        if first:
            best_x, best_loss = cand_x, cand_loss
            first = False
        else:
            _keep(best_x, best_loss, cand_x, cand_loss)

    logger.debug(
        "PGD attack finished",
        rows=x.shape[0],
        members=len(members),
        restarts=cfg.restarts,
        mean_loss=float(best_loss.mean()),
    )
    return best_x, best_loss


def pgd_attack(
    model: Model,
    x: np.ndarray,
    y: int,
    tm: ThreatModel | Ball,
    cfg: AttackConfig,
    rng: RandomSource | None = None,
    sample_index: int = 0,
) -> tuple[np.ndarray, float]:
    """
    Single-input PGD; the one-row case of pgd_attack_batch.

    With the same rng, sample_index=i reproduces row i of a batch attack.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError("pgd_attack expects a single input vector")
    x_adv, losses = pgd_attack_batch(model, x[None, :], np.array([y]), tm, cfg, rng, sample_ids=[sample_index])
    return x_adv[0], float(losses[0])
