"""Predicted versus measured adversarial loss on several target threat models."""

import math
from typing import Any

import structlog

from atvr.core.errors import ConfigError
from atvr.core.numerics import svd_spectrum
from atvr.experiments.configs import PredictLossConfig
from atvr.experiments.manifest import RunContext
from atvr.expansion.bounds import CE_LIPSCHITZ
from atvr.expansion.slopes import SlopeFormula, predict_target_loss, theoretical_slope_cross_norm
from atvr.models.base import Model, classifier_lipschitz
from atvr.threats.base import ThreatModel
from atvr.training.evaluation import empirical_adv_risk
from atvr.variation.union import dataset_variation

logger = structlog.get_logger(__name__)

PREDICT_COLUMNS = [
    "target",
    "slope",
    "source_variation",
    "source_loss",
    "predicted_target_loss",
    "true_target_loss",
    "gap",
]


def theoretical_slope_for(model: Model, source: ThreatModel, target: ThreatModel) -> float:
    """
    Cross-norm slope at B = cond(W), maximized over target members.

    Raises:
        ConfigError: If no slope is given and none can be derived
    """
    if not model.is_linear:
        raise ConfigError("Theoretical slopes need a linear extractor; give 'slopes' explicitly")
    if not source.is_single or source.members[0].eps == 0.0:
        raise ConfigError("Theoretical slopes need a single source ball with positive radius")
    B = svd_spectrum(model.W).condition_number
    if not math.isfinite(B):
        raise ConfigError("W is rank deficient; give 'slopes' explicitly", {"condition_number": B})
    src = source.members[0]
    return max(
        theoretical_slope_cross_norm(
            SlopeFormula(p=src.p, q=ball.p, eps1=src.eps, eps2=ball.eps, n=model.input_dim, B=B)
        )
        for ball in target.members
    )


def run_predict_loss(cfg: PredictLossConfig, ctx: RunContext | None = None) -> list[dict[str, Any]]:
    data = cfg.data.load(cfg.eval_set, cfg.seed)
    model = cfg.model.load(data.input_dim, cfg.seed)
    attack = cfg.attack.model_copy(update={"seed": cfg.seed})

    source_loss = empirical_adv_risk(model, data, cfg.source, attack, cfg.method).mean_loss
    source_variation = dataset_variation(model, data, cfg.source, attack).mean
    sigma_g = classifier_lipschitz(model)

    rows = []
    for i, target in enumerate(cfg.targets):
        measured = cfg.source.union(target) if cfg.union_with_source else target
        slope = cfg.slopes[i] if cfg.slopes is not None else theoretical_slope_for(model, cfg.source, target)
        predicted = predict_target_loss(source_loss, source_variation, CE_LIPSCHITZ, sigma_g, slope)
        true_loss = empirical_adv_risk(model, data, measured, attack, cfg.method).mean_loss
        rows.append(
            {
                "target": measured.label,
                "slope": slope,
                "source_variation": source_variation,
                "source_loss": source_loss,
                "predicted_target_loss": predicted,
                "true_target_loss": true_loss,
                "gap": predicted - true_loss,
            }
        )
        logger.info("Target loss prediction", target=measured.label, predicted=predicted, measured=true_loss)

    if ctx is not None:
        ctx.write_csv("predict_loss.csv", PREDICT_COLUMNS, rows)
    return rows
