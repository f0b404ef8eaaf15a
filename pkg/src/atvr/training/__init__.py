"""Adversarial training with variation regularization."""

from atvr.training.config import TrainConfig
from atvr.training.evaluation import empirical_adv_risk, gap_curve
from atvr.training.trainer import TrainingResult, at_vr_train

__all__ = ["TrainConfig", "TrainingResult", "at_vr_train", "empirical_adv_risk", "gap_curve"]
