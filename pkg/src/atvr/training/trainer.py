"""
Adversarial training with variation regularization.

Each step attacks the batch on the source threat model, finds variation
witness pairs on the same threat model, and takes one SGD-momentum step on

    mean CE(adversarial points) + lam * mean ||h(x1) - h(x2)||_2

with the adversarial points and witnesses held fixed.
"""

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import structlog

from atvr.attacks.pgd import pgd_attack_batch
from atvr.core.dataset import Dataset
from atvr.core.errors import InvalidInputError, NumericError, TrainingDivergedError
from atvr.core.numerics import RandomSource
from atvr.models.base import Model, classify, batch_features
from atvr.models.losses import ce_loss_batch
from atvr.models.objectives import Batch, at_vr_objective, grad_params
from atvr.training.config import TrainConfig
from atvr.training.optim import SGDMomentum
from atvr.variation.distances import build_distance
from atvr.variation.fast_lpv import fast_lpv_batch
from atvr.variation.union import union_variation_batch

logger = structlog.get_logger(__name__)

# Substream purposes under the training seed.
SHUFFLE_STREAM = 0
ATTACK_STREAM = 1
VARIATION_STREAM = 2
DISTANCE_SEED_OFFSET = 7919

LOG_COLUMNS = ["epoch", "clean_loss", "adv_loss", "variation", "objective", "clean_acc", "adv_acc"]


@dataclass
class EpochRecord:
    """Batch-size-weighted means over one epoch, measured before each step."""

    epoch: int
    clean_loss: float
    adv_loss: float
    variation: float
    objective: float
    clean_acc: float
    adv_acc: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingResult:
    model: Model
    log: list[EpochRecord] = field(default_factory=list)
    checkpoints: list[Model] = field(default_factory=list)

    def log_rows(self) -> list[dict[str, Any]]:
        return [record.to_dict() for record in self.log]


def batch_streams(seed: int, epoch: int, batch: int) -> tuple[RandomSource, RandomSource]:
    """Random streams for one step: (attack, variation)."""
    root = RandomSource(seed)
    return root.substream(ATTACK_STREAM, epoch, batch), root.substream(VARIATION_STREAM, epoch, batch)


def epoch_batches(num_samples: int, batch_size: int | None, seed: int, epoch: int) -> list[np.ndarray]:
    """Index arrays for one epoch; full batch keeps the data order."""
    if batch_size is None or batch_size >= num_samples:
        return [np.arange(num_samples)]
    order = RandomSource(seed).substream(SHUFFLE_STREAM, epoch).permutation(num_samples)
    return [order[i : i + batch_size] for i in range(0, num_samples, batch_size)]


def _variation_witnesses(
    model: Model, x: np.ndarray, cfg: TrainConfig, rng: RandomSource, sample_ids: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if cfg.variation_source == "fast_lpv":
        distance = build_distance(cfg.distance, model.input_dim, seed=cfg.seed + DISTANCE_SEED_OFFSET)
        eps = cfg.lpv_eps if cfg.lpv_eps is not None else cfg.source.max_eps
        return fast_lpv_batch(model, distance, x, eps, cfg.variation.steps, rng)
    return union_variation_batch(model, x, cfg.source, cfg.variation, method="pgd", rng=rng, sample_ids=sample_ids)


def _accuracy(model: Model, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    feats, _ = batch_features(model, x)
    logits = classify(model, feats)
    losses, _ = ce_loss_batch(logits, y)
    return losses, (np.argmax(logits, axis=1) == y)


def at_vr_train(init: Model, data: Dataset, cfg: TrainConfig) -> TrainingResult:
    """
    Train from `init` and return the final model with a per-epoch log.

    Deterministic given cfg (seed included). epochs=0 returns a copy of init.

    Raises:
        InvalidInputError: If the data does not match the model
        TrainingDivergedError: If the objective becomes non-finite
    """
    if len(data) == 0:
        raise InvalidInputError("Cannot train on an empty dataset")
    if data.input_dim != init.input_dim:
        raise InvalidInputError(
            "Dataset and model input dimensions differ",
            {"data": data.input_dim, "model": init.input_dim},
        )
    if int(data.y.max()) >= init.num_classes:
        raise InvalidInputError("Dataset has more classes than the model")

    model = init.copy()
    optimizer = SGDMomentum(cfg.learning_rate, cfg.momentum)
    result = TrainingResult(model=model)
    log = logger.bind(lam=cfg.lam, source=cfg.source.label, seed=cfg.seed)
    log.info("Training started", epochs=cfg.epochs, samples=len(data))

    for epoch in range(cfg.epochs):
        totals = np.zeros(len(LOG_COLUMNS) - 1)
        for b, idx in enumerate(epoch_batches(len(data), cfg.batch_size, cfg.seed, epoch)):
            xb, yb = data.x[idx], data.y[idx]
            attack_rng, variation_rng = batch_streams(cfg.seed, epoch, b)

            clean_losses, clean_correct = _accuracy(model, xb, yb)
            x_adv, adv_losses = pgd_attack_batch(model, xb, yb, cfg.source, cfg.attack, attack_rng, sample_ids=idx)
            _, adv_correct = _accuracy(model, x_adv, yb)
            values, x1, x2 = _variation_witnesses(model, xb, cfg, variation_rng, idx)

            objective = at_vr_objective(cfg.lam, x1, x2)
            try:
                value, grads = grad_params(model, Batch(x_adv, yb), objective)
            except NumericError as exc:
                objective_value = float(exc.details.get("value", np.nan))
                raise TrainingDivergedError(epoch=epoch, batch=b, objective=objective_value) from exc

            model = model.with_params(optimizer.step(model.params, grads), epoch=epoch + 1)
            totals += len(idx) * np.array(
                [
                    clean_losses.mean(),
                    adv_losses.mean(),
                    values.mean(),
                    value,
                    clean_correct.mean(),
                    adv_correct.mean(),
                ]
            )

        means = totals / len(data)
        record = EpochRecord(epoch, *(float(v) for v in means))
        result.log.append(record)
        log.debug("Epoch complete", **record.to_dict())
        if cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
            result.checkpoints.append(model.copy())

    result.model = model
    if result.log:
        log.info("Training finished", **result.log[-1].to_dict())
    return result
