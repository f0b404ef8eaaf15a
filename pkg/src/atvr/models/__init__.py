"""Feature extractors, linear heads, losses and checkpoints."""

from atvr.models.base import Model, features, forward, init_model, linear_model
from atvr.models.checkpoint import load_model, save_model
from atvr.models.losses import ce_loss, grad_input
from atvr.models.objectives import (
    Batch,
    CrossEntropyObjective,
    Objective,
    VariationObjective,
    WeightedObjective,
    at_vr_objective,
)

__all__ = [
    "Batch",
    "CrossEntropyObjective",
    "Model",
    "Objective",
    "VariationObjective",
    "WeightedObjective",
    "at_vr_objective",
    "ce_loss",
    "features",
    "forward",
    "grad_input",
    "init_model",
    "linear_model",
    "load_model",
    "save_model",
]
