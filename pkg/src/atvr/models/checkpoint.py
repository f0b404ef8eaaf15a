"""
JSON checkpoint format.

Floats are written with Python's shortest round-trip repr, so a save/load
cycle reproduces every parameter bit-for-bit.
"""

import json
from pathlib import Path
from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel, ValidationError

from atvr.core.errors import InvalidInputError, SchemaError
from atvr.models.base import Model

logger = structlog.get_logger(__name__)

CHECKPOINT_VERSION = 1


class Dims(BaseModel):
    input_dim: int
    feature_dim: int
    num_classes: int
    hidden_dim: int | None = None


class CheckpointDocument(BaseModel):
    format_version: Literal[1] = CHECKPOINT_VERSION
    kind: Literal["linear", "mlp1"]
    activation: Literal["tanh", "relu"] = "tanh"
    identity_classifier: bool = False
    dims: Dims
    parameters: dict[str, list[float]]
    seed: int | None = None
    epoch: int | None = None


def _shapes(doc: CheckpointDocument) -> dict[str, tuple[int, ...]]:
    n, d, k, h = doc.dims.input_dim, doc.dims.feature_dim, doc.dims.num_classes, doc.dims.hidden_dim
    if doc.kind == "linear":
        shapes: dict[str, tuple[int, ...]] = {"W": (d, n), "b1": (d,)}
    else:
        if not h:
            raise SchemaError("dims.hidden_dim", "required for mlp1 extractors")
        shapes = {"W1": (h, n), "b1": (h,), "W2": (d, h), "b2m": (d,)}
    if not doc.identity_classifier:
        shapes["A"] = (k, d)
    shapes["b2"] = (k,)
    return shapes


def to_document(model: Model) -> CheckpointDocument:
    return CheckpointDocument(
        kind=model.kind,
        activation=model.activation,
        identity_classifier=model.identity_classifier,
        dims=Dims(
            input_dim=model.input_dim,
            feature_dim=model.feature_dim,
            num_classes=model.num_classes,
            hidden_dim=int(model.params["W1"].shape[0]) if model.kind == "mlp1" else None,
        ),
        parameters={name: model.params[name].ravel().tolist() for name in model.param_names()},
        seed=model.metadata.get("seed"),
        epoch=model.metadata.get("epoch"),
    )


def from_document(doc: CheckpointDocument) -> Model:
    params: dict[str, np.ndarray] = {}
    for name, shape in _shapes(doc).items():
        if name not in doc.parameters:
            raise SchemaError(f"parameters.{name}", "missing")
        flat = np.asarray(doc.parameters[name], dtype=np.float64)
        if flat.size != int(np.prod(shape)):
            raise SchemaError(
                f"parameters.{name}", f"expected {int(np.prod(shape))} values, got {flat.size}"
            )
        params[name] = flat.reshape(shape)
    try:
        return Model(
            kind=doc.kind,
            params=params,
            identity_classifier=doc.identity_classifier,
            activation=doc.activation,
            metadata={"seed": doc.seed, "epoch": doc.epoch},
        )
    except InvalidInputError as e:
        raise SchemaError("parameters", e.message) from e


def dumps_model(model: Model) -> str:
    return json.dumps(to_document(model).model_dump(), indent=2, sort_keys=True) + "\n"


def save_model(model: Model, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model))
    logger.debug("Saved checkpoint", path=str(path), kind=model.kind)
    return path


def load_model(path: str | Path) -> Model:
    """
    Load a checkpoint.

    Raises:
        SchemaError: If the file is not valid JSON or does not match the format
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(str(path), f"cannot read checkpoint: {e}") from e
    try:
        doc = CheckpointDocument.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise SchemaError(".".join(str(p) for p in first["loc"]) or str(path), first["msg"]) from e
    return from_document(doc)
