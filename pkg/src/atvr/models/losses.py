"""Cross-entropy loss with gradient w.r.t. logits."""

import numpy as np

from atvr.core.errors import InvalidInputError
from atvr.core.types import LossValue
from atvr.models.base import Model, as_inputs, batch_features, classifier_backward, classify, feature_backward


def _check_labels(y: np.ndarray, num_classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if np.any(y < 0) or np.any(y >= num_classes):
        raise InvalidInputError(
            "Label out of range", {"num_classes": num_classes, "labels": np.unique(y).tolist()}
        )
    return y


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def ce_loss_batch(logits: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-row cross-entropy and its gradient w.r.t. the logits.

    Args:
        logits: (m, K)
        y: (m,) integer labels

    Returns:
        (losses (m,), softmax - onehot (m, K))
    """
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    y = _check_labels(np.atleast_1d(y), logits.shape[1])
    if y.shape[0] != logits.shape[0]:
        raise InvalidInputError("logits and labels disagree on batch size")
    logp = log_softmax(logits)
    rows = np.arange(y.shape[0])
    losses = -logp[rows, y]
    grad = np.exp(logp)
    grad[rows, y] -= 1.0
    return losses, grad


def ce_loss(logits: np.ndarray, y: int) -> LossValue:
    """Cross-entropy for a single logit vector, stable for large logits."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1:
        raise InvalidInputError("ce_loss expects a single logit vector")
    losses, grad = ce_loss_batch(logits[None, :], np.array([y]))
    return LossValue(value=float(losses[0]), grad_logits=grad[0])


def predict(logits: np.ndarray) -> np.ndarray:
    return np.argmax(np.atleast_2d(logits), axis=1)


def loss_and_input_grad(model: Model, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-row cross-entropy of the model and its gradient w.r.t. each input row.

    Args:
        x: (m, n) inputs
        y: (m,) labels

    Returns:
        (losses (m,), gradients (m, n))

    Raises:
        InvalidInputError: If the inputs do not match the model dimension
    """
    x, _ = as_inputs(model, x)
    feats, _ = batch_features(model, x)
    losses, grad_logits = ce_loss_batch(classify(model, feats), y)
    grad_feats, _ = classifier_backward(model, feats, grad_logits)
    grad_x, _ = feature_backward(model, x, grad_feats, need_params=False)
    return losses, grad_x


def grad_input(model: Model, x: np.ndarray, y: int) -> np.ndarray:
    """Gradient of the cross-entropy w.r.t. a single input."""
    x, single = as_inputs(model, x)
    if not single:
        raise InvalidInputError("grad_input expects a single input vector")
    _, grads = loss_and_input_grad(model, x, np.array([y]))
    return grads[0]
