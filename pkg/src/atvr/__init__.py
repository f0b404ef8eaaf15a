"""atvr - threat-model generalization toolkit.

This package provides:
- Threats: l_p balls, unions, projections
- Models: linear and one-hidden-layer feature extractors with a linear head
- Attacks: PGD and exact worst case for binary linear models
- Variation: PGD, exact, Fast-LPV and Hausdorff estimators
- Expansion: minimum-slope fits, theoretical slopes, loss prediction
- Training: adversarial training with variation regularization
- CLI: experiment drivers writing CSV, JSON and SVG artifacts
"""

__version__ = "0.1.0"

from atvr.attacks import AttackConfig, exact_adv_loss_linear, pgd_attack
from atvr.core import AtvrError, Dataset, RandomSource
from atvr.expansion import fit_min_slope, predict_target_loss
from atvr.models import Model, init_model, linear_model
from atvr.threats import Ball, Norm, ThreatModel
from atvr.training import TrainConfig, at_vr_train, empirical_adv_risk
from atvr.variation import (
    dataset_variation,
    hausdorff_estimate,
    union_variation,
    variation_exact_linear,
    variation_pgd,
)

__all__ = [
    "__version__",
    "AttackConfig",
    "AtvrError",
    "Ball",
    "Dataset",
    "Model",
    "Norm",
    "RandomSource",
    "ThreatModel",
    "TrainConfig",
    "at_vr_train",
    "dataset_variation",
    "empirical_adv_risk",
    "exact_adv_loss_linear",
    "fit_min_slope",
    "hausdorff_estimate",
    "init_model",
    "linear_model",
    "pgd_attack",
    "predict_target_loss",
    "union_variation",
    "variation_exact_linear",
    "variation_pgd",
]
