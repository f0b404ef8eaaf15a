"""
Function class F = G o H: a feature extractor h (linear or one-hidden-layer
MLP) followed by a linear classifier g(z) = Az + b2 (A may be the identity).

Gradients are propagated by hand; every forward helper accepts a single
input (n,) or a batch (m, n).
"""

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from atvr.core.errors import InvalidInputError, UnsupportedModelError
from atvr.core.numerics import RandomSource, svd_spectrum

ExtractorKind = Literal["linear", "mlp1"]
Activation = Literal["tanh", "relu"]

EXTRACTOR_PARAMS: dict[str, tuple[str, ...]] = {
    "linear": ("W", "b1"),
    "mlp1": ("W1", "b1", "W2", "b2m"),
}


@dataclass
class Model:
    """
    Parameters of f = g o h.

    linear:  h(x) = W x + b1, W is (d, n)
    mlp1:    h(x) = W2 act(W1 x + b1) + b2m, W1 is (hidden, n), W2 is (d, hidden)
    classifier: g(z) = A z + b2 with A (K, d), or g(z) = z + b2 when
    identity_classifier is set (then K = d).
    """

    kind: ExtractorKind
    params: dict[str, np.ndarray]
    identity_classifier: bool = False
    activation: Activation = "tanh"
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in EXTRACTOR_PARAMS:
            raise InvalidInputError(f"Unknown extractor kind: {self.kind}")
        if self.activation not in ("tanh", "relu"):
            raise InvalidInputError(f"Unknown activation: {self.activation}")
        self.params = {k: np.asarray(v, dtype=np.float64) for k, v in self.params.items()}
        missing = [k for k in self.param_names() if k not in self.params]
        if missing:
            raise InvalidInputError("Missing model parameters", {"missing": missing})
        for name, value in self.params.items():
            if not np.all(np.isfinite(value)):
                raise InvalidInputError(f"Parameter {name} has non-finite entries")
        self._check_shapes()

    def _check_shapes(self) -> None:
        p = self.params
        if self.kind == "linear":
            d, n = p["W"].shape
            chain = [(p["b1"].shape, (d,))]
        else:
            hidden, n = p["W1"].shape
            d = p["W2"].shape[0]
            chain = [
                (p["b1"].shape, (hidden,)),
                (p["W2"].shape, (d, hidden)),
                (p["b2m"].shape, (d,)),
            ]
        if self.identity_classifier:
            chain.append((p["b2"].shape, (d,)))
        else:
            k = p["A"].shape[0]
            chain += [(p["A"].shape, (k, d)), (p["b2"].shape, (k,))]
        for got, expected in chain:
            if tuple(got) != expected:
                raise InvalidInputError(
                    "Inconsistent parameter shapes", {"got": tuple(got), "expected": expected}
                )

    def param_names(self) -> tuple[str, ...]:
        names = EXTRACTOR_PARAMS[self.kind]
        return names + (("b2",) if self.identity_classifier else ("A", "b2"))

    @property
    def input_dim(self) -> int:
        return int(self.params["W" if self.kind == "linear" else "W1"].shape[1])

    @property
    def feature_dim(self) -> int:
        return int(self.params["W" if self.kind == "linear" else "W2"].shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.params["b2"].shape[0])

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    @property
    def W(self) -> np.ndarray:
        """Linear extractor weight."""
        if self.kind != "linear":
            raise UnsupportedModelError("W is only defined for linear extractors", {"kind": self.kind})
        return self.params["W"]

    @property
    def A(self) -> np.ndarray:
        """Classifier weight (identity matrix for identity classifiers)."""
        if self.identity_classifier:
            return np.eye(self.feature_dim)
        return self.params["A"]

    def with_params(self, params: dict[str, np.ndarray], **metadata: Any) -> "Model":
        """New model with replaced parameters (missing names are kept)."""
        merged = {k: np.array(v, copy=True) for k, v in self.params.items()}
        merged.update({k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()})
        return Model(
            kind=self.kind,
            params=merged,
            identity_classifier=self.identity_classifier,
            activation=self.activation,
            metadata={**self.metadata, **metadata},
        )

    def copy(self) -> "Model":
        return self.with_params({})


def _act(z: np.ndarray, activation: Activation) -> np.ndarray:
    return np.tanh(z) if activation == "tanh" else np.maximum(z, 0.0)


def _act_grad(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return (z > 0).astype(np.float64)


def as_inputs(m: Model, x: np.ndarray) -> tuple[np.ndarray, bool]:
    """Validated 2-D inputs and whether a single vector was given."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != m.input_dim or x.ndim not in (1, 2):
        raise InvalidInputError(
            f"Input has shape {x.shape}, model expects dimension {m.input_dim}",
            {"shape": x.shape, "input_dim": m.input_dim},
        )
    return np.atleast_2d(x), x.ndim == 1


def batch_features(m: Model, x2d: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Features for a batch, plus the hidden pre-activation (mlp1 only)."""
    p = m.params
    if m.kind == "linear":
        return x2d @ p["W"].T + p["b1"], None
    pre = x2d @ p["W1"].T + p["b1"]
    return _act(pre, m.activation) @ p["W2"].T + p["b2m"], pre


def classify(m: Model, feats: np.ndarray) -> np.ndarray:
    if m.identity_classifier:
        return feats + m.params["b2"]
    return feats @ m.params["A"].T + m.params["b2"]


def features(m: Model, x: np.ndarray) -> np.ndarray:
    """h(x)."""
    x2d, single = as_inputs(m, x)
    feats, _ = batch_features(m, x2d)
    return feats[0] if single else feats


def forward(m: Model, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Features h(x) and logits g(h(x)).

    Raises:
        InvalidInputError: If x does not have the model's input dimension
    """
    x2d, single = as_inputs(m, x)
    feats, _ = batch_features(m, x2d)
    logits = classify(m, feats)
    if single:
        return feats[0], logits[0]
    return feats, logits


def feature_backward(
    m: Model, x: np.ndarray, upstream: np.ndarray, need_params: bool = True
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """
    Vector-Jacobian products through h for a batch.

    Args:
        x: Inputs (m, n)
        upstream: d(objective)/d(features), shape (m, d)
        need_params: Skip parameter gradients when only input gradients are needed

    Returns:
        (gradient w.r.t. each input row (m, n), parameter gradients summed over rows)
    """
    x2d, _ = as_inputs(m, x)
    upstream = np.atleast_2d(upstream)
    p = m.params
    grads: dict[str, np.ndarray] = {}
    if m.kind == "linear":
        grad_x = upstream @ p["W"]
        if need_params:
            grads["W"] = upstream.T @ x2d
            grads["b1"] = upstream.sum(axis=0)
        return grad_x, grads

    pre = x2d @ p["W1"].T + p["b1"]
    hidden = _act(pre, m.activation)
    grad_hidden = upstream @ p["W2"]
    grad_pre = grad_hidden * _act_grad(pre, m.activation)
    grad_x = grad_pre @ p["W1"]
    if need_params:
        grads["W2"] = upstream.T @ hidden
        grads["b2m"] = upstream.sum(axis=0)
        grads["W1"] = grad_pre.T @ x2d
        grads["b1"] = grad_pre.sum(axis=0)
    return grad_x, grads


def classifier_backward(
    m: Model, feats: np.ndarray, grad_logits: np.ndarray
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Gradient w.r.t. features and classifier parameters (summed over rows)."""
    grads: dict[str, np.ndarray] = {"b2": grad_logits.sum(axis=0)}
    if m.identity_classifier:
        return grad_logits, grads
    grads["A"] = grad_logits.T @ feats
    return grad_logits @ m.params["A"], grads


def zero_grads(m: Model) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(m.params[name]) for name in m.param_names()}


def classifier_lipschitz(m: Model) -> float:
    """
    Lipschitz constant of g w.r.t. l2: sigma_max(A), or 1 for the identity.

    Classifiers in this package are always linear, so the value is exact.
    """
    if m.identity_classifier:
        return 1.0
    if m.params["A"].ndim != 2:
        raise UnsupportedModelError("Classifier must be linear")
    return svd_spectrum(m.params["A"]).sigma_max


def init_model(
    kind: ExtractorKind,
    input_dim: int,
    feature_dim: int,
    num_classes: int,
    rng: RandomSource,
    identity_classifier: bool = False,
    hidden_dim: int | None = None,
    activation: Activation = "tanh",
    init: Literal["uniform", "normal"] = "uniform",
    scale: float = 1.0,
) -> Model:
    """
    Randomly initialized model.

    "uniform" draws each weight from U(-1/sqrt(fan_in), 1/sqrt(fan_in)) and
    biases likewise; "normal" draws every parameter from N(0, scale^2).
    """
    if identity_classifier and feature_dim != num_classes:
        raise InvalidInputError(
            "Identity classifier requires feature_dim == num_classes",
            {"feature_dim": feature_dim, "num_classes": num_classes},
        )
    if kind == "mlp1" and not hidden_dim:
        raise InvalidInputError("mlp1 extractor needs hidden_dim")

    def draw(shape: tuple[int, ...], fan_in: int) -> np.ndarray:
        if init == "normal":
            return rng.normal(shape, scale)
        bound = scale / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, shape)

    if kind == "linear":
        params = {
            "W": draw((feature_dim, input_dim), input_dim),
            "b1": draw((feature_dim,), input_dim),
        }
    else:
        assert hidden_dim is not None
        params = {
            "W1": draw((hidden_dim, input_dim), input_dim),
            "b1": draw((hidden_dim,), input_dim),
            "W2": draw((feature_dim, hidden_dim), hidden_dim),
            "b2m": draw((feature_dim,), hidden_dim),
        }
    if not identity_classifier:
        params["A"] = draw((num_classes, feature_dim), feature_dim)
    params["b2"] = draw((num_classes,), feature_dim)

    return Model(
        kind=kind,
        params=params,
        identity_classifier=identity_classifier,
        activation=activation,
        metadata={"seed": rng.seed, "epoch": 0},
    )


def linear_model(
    W: np.ndarray,
    A: np.ndarray | None = None,
    b1: np.ndarray | None = None,
    b2: np.ndarray | None = None,
) -> Model:
    """Linear model from explicit matrices (A=None gives an identity classifier)."""
    W = np.asarray(W, dtype=np.float64)
    d = W.shape[0]
    identity = A is None
    k = d if identity else np.asarray(A).shape[0]
    params = {
        "W": W,
        "b1": np.zeros(d) if b1 is None else b1,
        "b2": np.zeros(k) if b2 is None else b2,
    }
    if not identity:
        params["A"] = A
    return Model(kind="linear", params=params, identity_classifier=identity)
