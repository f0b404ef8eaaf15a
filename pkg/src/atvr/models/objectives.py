"""
Training objectives over model parameters.

Each objective returns its batch-mean value and the gradient of that value
w.r.t. every model parameter.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from atvr.core.errors import InvalidInputError, NumericError
from atvr.models.base import (
    Model,
    batch_features,
    classify,
    classifier_backward,
    feature_backward,
    zero_grads,
)
from atvr.models.losses import ce_loss_batch

Grads = dict[str, np.ndarray]


@dataclass
class Batch:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=np.int64))
        if self.x.shape[0] == 0:
            raise InvalidInputError("Empty batch")
        if self.x.shape[0] != self.y.shape[0]:
            raise InvalidInputError("Batch inputs and labels disagree on size")

    def __len__(self) -> int:
        return int(self.x.shape[0])


class Objective(ABC):
    @abstractmethod
    def value_and_grad(self, model: Model, batch: Batch) -> tuple[float, Grads]:
        ...


class CrossEntropyObjective(Objective):
    """Mean cross-entropy at batch.x."""

    def value_and_grad(self, model: Model, batch: Batch) -> tuple[float, Grads]:
        feats, _ = batch_features(model, batch.x)
        logits = classify(model, feats)
        losses, grad_logits = ce_loss_batch(logits, batch.y)
        m = len(batch)
        grad_logits /= m
        grad_feats, grads = classifier_backward(model, feats, grad_logits)
        _, ext = feature_backward(model, batch.x, grad_feats)
        grads.update(ext)
        return float(losses.mean()), grads


class VariationObjective(Objective):
    """
    Mean ||h(x1_i) - h(x2_i)||_2 over witness pairs; batch.y is ignored.

    Rows where the two features coincide contribute a zero subgradient.
    """

    def __init__(self, x1: np.ndarray, x2: np.ndarray):
        self.x1 = np.atleast_2d(np.asarray(x1, dtype=np.float64))
        self.x2 = np.atleast_2d(np.asarray(x2, dtype=np.float64))
        if self.x1.shape != self.x2.shape:
            raise InvalidInputError("Witness arrays must share a shape")

    def value_and_grad(self, model: Model, batch: Batch) -> tuple[float, Grads]:
        f1, _ = batch_features(model, self.x1)
        f2, _ = batch_features(model, self.x2)
        diff = f1 - f2
        norms = np.linalg.norm(diff, axis=1)
        m = diff.shape[0]
        safe = np.where(norms > 0, norms, 1.0)
        up = np.where(norms[:, None] > 0, diff / safe[:, None], 0.0) / m

        grads = zero_grads(model)
        _, g1 = feature_backward(model, self.x1, up)
        _, g2 = feature_backward(model, self.x2, -up)
        for name in g1:
            grads[name] = g1[name] + g2[name]
        return float(norms.mean()), grads


class WeightedObjective(Objective):
    """sum_k weight_k * objective_k; zero-weight terms are not evaluated."""

    def __init__(self, terms: list[tuple[float, Objective]]):
        self.terms = terms

    def value_and_grad(self, model: Model, batch: Batch) -> tuple[float, Grads]:
        total = 0.0
        grads = zero_grads(model)
        for weight, objective in self.terms:
            if weight == 0.0:
                continue
            value, term_grads = objective.value_and_grad(model, batch)
            total += weight * value
            for name, g in term_grads.items():
                grads[name] = grads[name] + weight * g
        return total, grads


def at_vr_objective(lam: float, x1: np.ndarray | None = None, x2: np.ndarray | None = None) -> Objective:
    """Cross-entropy at batch.x plus lam times the variation of (x1, x2)."""
    if lam < 0:
        raise InvalidInputError("lambda must be non-negative", {"lambda": lam})
    terms: list[tuple[float, Objective]] = [(1.0, CrossEntropyObjective())]
    if lam > 0:
        if x1 is None or x2 is None:
            raise InvalidInputError("Variation term needs witness pairs")
        terms.append((lam, VariationObjective(x1, x2)))
    return WeightedObjective(terms)


def grad_params(model: Model, batch: Batch, objective: Objective) -> tuple[float, Grads]:
    """
    Objective value and parameter gradients.

    Raises:
        NumericError: If the value or any gradient is non-finite
    """
    value, grads = objective.value_and_grad(model, batch)
    if not np.isfinite(value) or not all(np.all(np.isfinite(g)) for g in grads.values()):
        raise NumericError("Objective or gradient is non-finite", {"value": value})
    return value, grads
