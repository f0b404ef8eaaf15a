"""Empirical (adversarial) risk and threat-model generalization gaps."""

from dataclasses import asdict, dataclass
from typing import Any, Literal

import numpy as np
import structlog

from atvr.attacks.config import AttackConfig, evaluation_attack
from atvr.attacks.exact import exact_adv_margin_linear_batch
from atvr.attacks.pgd import pgd_attack_batch
from atvr.core.dataset import Dataset
from atvr.core.errors import InvalidInputError
from atvr.core.numerics import RandomSource
from atvr.core.types import RiskEstimate
from atvr.models.base import Model, batch_features, classify
from atvr.models.losses import ce_loss_batch
from atvr.threats.base import ThreatModel

logger = structlog.get_logger(__name__)

EvalMethod = Literal["auto", "clean", "pgd", "exact_linear"]


def resolve_method(model: Model, method: EvalMethod) -> str:
    """auto: exact for binary linear models, PGD otherwise."""
    if method != "auto":
        return method
    return "exact_linear" if model.is_linear and model.num_classes == 2 else "pgd"


def empirical_adv_risk(
    model: Model,
    data: Dataset,
    tm: ThreatModel,
    cfg: AttackConfig | None = None,
    method: EvalMethod = "auto",
    rng: RandomSource | None = None,
) -> RiskEstimate:
    """
    Mean worst-case loss and worst-case accuracy over a dataset.

    exact_linear counts a sample as correct iff its worst-case margin is
    positive; pgd iff the attacked point is still classified correctly.

    Raises:
        InvalidInputError: On an empty dataset
        UnsupportedModelError: exact_linear on a non-binary or nonlinear model
    """
    if len(data) == 0:
        raise InvalidInputError("Cannot evaluate risk on an empty dataset")
    resolved = resolve_method(model, method)

    if resolved == "exact_linear":
        margins = exact_adv_margin_linear_batch(model, data.x, data.y, tm)
        losses = np.logaddexp(0.0, -margins)
        correct = margins > 0
    else:
        points = data.x
        if resolved == "pgd":
            points, _ = pgd_attack_batch(model, data.x, data.y, tm, cfg or evaluation_attack(), rng)
        logits = classify(model, batch_features(model, points)[0])
        losses, _ = ce_loss_batch(logits, data.y)
        correct = np.argmax(logits, axis=1) == data.y

    return RiskEstimate(
        mean_loss=float(np.mean(losses)),
        accuracy=float(np.mean(correct)),
        method=resolved,  # type: ignore[arg-type]
        num_samples=len(data),
        losses=losses,
    )


@dataclass
class GapRow:
    label: str
    source_loss: float
    target_loss: float
    gap: float
    source_acc: float
    target_acc: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def gap_curve(
    model: Model,
    data: Dataset,
    source: ThreatModel,
    targets: list[ThreatModel],
    cfg: AttackConfig | None = None,
    method: EvalMethod = "auto",
) -> list[GapRow]:
    """
    L_T - L_S for each target, all evaluated with the same method.

    Targets are expected to contain the source (e.g. source.union(bigger ball)).
    """
    source_risk = empirical_adv_risk(model, data, source, cfg, method)
    rows = []
    for target in targets:
        risk = empirical_adv_risk(model, data, target, cfg, method)
        rows.append(
            GapRow(
                label=target.label,
                source_loss=source_risk.mean_loss,
                target_loss=risk.mean_loss,
                gap=risk.mean_loss - source_risk.mean_loss,
                source_acc=source_risk.accuracy,
                target_acc=risk.accuracy,
            )
        )
    logger.debug("Gap curve", source=source.label, targets=len(targets), method=source_risk.method)
    return rows
