"""
Run configuration documents, one per CLI subcommand.

A document is JSON (or YAML, its superset). Threat models use
{"p": "inf", "eps": 0.01} or {"union": [...]}.
"""

from pathlib import Path
from typing import Any, Literal, TypeVar

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from atvr.attacks.config import AttackConfig
from atvr.core.dataset import Dataset, load_dataset_csv
from atvr.core.errors import ConfigError
from atvr.core.numerics import RandomSource
from atvr.experiments.data import GaussianSpec, Split, gen_gaussian
from atvr.models.base import Model, init_model
from atvr.models.checkpoint import load_model
from atvr.threats.base import Norm, NormField, ThreatModel
from atvr.training.config import TrainConfig

ConfigT = TypeVar("ConfigT", bound=BaseModel)


class _Strict(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


class DataConfig(_Strict):
    """Generate Gaussian data or read a dataset CSV written by gen-data."""

    gaussian: GaussianSpec | None = None
    path: Path | None = None
    test_path: Path | None = None
    max_samples: int | None = Field(None, ge=1)

    @model_validator(mode="after")
    def _one_source(self) -> "DataConfig":
        if (self.gaussian is None) == (self.path is None):
            raise ValueError("data needs exactly one of 'gaussian' or 'path'")
        return self

    def load(self, split: Split, seed: int) -> Dataset:
        if self.gaussian is not None:
            data = gen_gaussian(self.gaussian, split, seed)
        else:
            path = self.path if split == "train" else self.test_path
            if path is None:
                raise ConfigError("data.test_path is required to evaluate on the test split")
            data = load_dataset_csv(path)
        return data.head(self.max_samples) if self.max_samples else data


class ModelSpec(_Strict):
    kind: Literal["linear", "mlp1"] = "linear"
    feature_dim: int = Field(5, ge=1)
    num_classes: int = Field(2, ge=2)
    hidden_dim: int | None = Field(None, ge=1)
    identity_classifier: bool = False
    activation: Literal["tanh", "relu"] = "tanh"
    init: Literal["uniform", "normal"] = "uniform"
    scale: float = Field(1.0, gt=0.0)

    def build(self, input_dim: int, rng: RandomSource) -> Model:
        return init_model(
            self.kind,
            input_dim,
            self.feature_dim,
            self.num_classes,
            rng,
            identity_classifier=self.identity_classifier,
            hidden_dim=self.hidden_dim,
            activation=self.activation,
            init=self.init,
            scale=self.scale,
        )


class RunConfig(_Strict):
    seed: int = Field(0, ge=0)


class GenDataConfig(RunConfig):
    data: GaussianSpec = Field(default_factory=GaussianSpec)
    splits: list[Split] = Field(default_factory=lambda: ["train"])


class TrainRunConfig(RunConfig):
    data: DataConfig
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig


class ModelSource(_Strict):
    """A saved checkpoint, or a fresh model from a spec."""

    checkpoint: Path | None = None
    spec: ModelSpec | None = None

    @model_validator(mode="after")
    def _one_source(self) -> "ModelSource":
        if (self.checkpoint is None) == (self.spec is None):
            raise ValueError("model needs exactly one of 'checkpoint' or 'spec'")
        return self

    def load(self, input_dim: int, seed: int) -> Model:
        if self.checkpoint is not None:
            return load_model(self.checkpoint)
        assert self.spec is not None
        return self.spec.build(input_dim, RandomSource(seed))


class EvalConfig(RunConfig):
    data: DataConfig
    model: ModelSource
    threat_models: list[ThreatModel] = Field(..., min_length=1)
    method: Literal["auto", "clean", "pgd", "exact_linear"] = "auto"
    attack: AttackConfig = Field(default_factory=lambda: AttackConfig(steps=100, restarts=10))
    eval_set: Split


class VariationRunConfig(RunConfig):
    data: DataConfig
    model: ModelSource
    threat_model: ThreatModel
    method: Literal["auto", "pgd", "exact", "fast_lpv"] = "auto"
    attack: AttackConfig = Field(default_factory=lambda: AttackConfig(steps=100, restarts=10))
    distance: Literal["l2", "random_linear"] = "l2"
    eval_set: Split = "train"


class TrajectoryConfig(_Strict):
    data: DataConfig
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig
    lam_grid: list[float] = Field(default_factory=lambda: [0.0, 0.1, 1.0])


class ExpansionRunConfig(RunConfig):
    source: ThreatModel
    target: ThreatModel
    sampling: Literal["random_normal", "training_trajectory"] = "random_normal"
    num_models: int = Field(100, ge=1)
    input_dim: int = Field(25, ge=1)
    feature_dim: int = Field(5, ge=1)
    union_with_source: bool = Field(True, description="Measure the target as source ∪ target")
    attack: AttackConfig = Field(default_factory=lambda: AttackConfig(steps=100, restarts=10))
    zero_tol: float = Field(1e-8, ge=0.0)
    trajectory: TrajectoryConfig | None = None

    @model_validator(mode="after")
    def _trajectory(self) -> "ExpansionRunConfig":
        if self.sampling == "training_trajectory" and self.trajectory is None:
            raise ValueError("training_trajectory sampling needs a 'trajectory' section")
        return self


class GapRunConfig(RunConfig):
    data: DataConfig
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig
    lam_grid: list[float] = Field(default_factory=lambda: [0.0, 1.0])
    target_norms: list[NormField] = Field(default_factory=lambda: [Norm.LINF, Norm.L2])
    target_eps: list[float] = Field(default_factory=lambda: [0.01, 0.02, 0.03, 0.04, 0.05])
    method: Literal["auto", "pgd", "exact_linear"] = "auto"
    attack: AttackConfig = Field(default_factory=lambda: AttackConfig(steps=100, restarts=10))
    eval_set: Split


class HausdorffRunConfig(RunConfig):
    data: DataConfig
    model: ModelSource
    source: ThreatModel
    target: ThreatModel
    attack: AttackConfig = Field(default_factory=lambda: AttackConfig(steps=20, restarts=2))
    inner_steps: int = Field(20, ge=0)
    inner_restarts: int = Field(5, ge=0)
    samples: int = Field(16, ge=0)
    eval_set: Split = "train"


class VerifyConfig(RunConfig):
    num_models: int = Field(100, ge=1)
    input_dim: int = Field(8, ge=1, le=20)
    feature_dim: int = Field(10, ge=1)
    samples_per_class: int = Field(10, ge=1)
    sigma: float = Field(0.125, gt=0.0)
    source_eps: float = Field(0.01, gt=0.0)
    target_eps: list[float] = Field(default_factory=lambda: [0.01, 0.05])
    norms: list[NormField] = Field(default_factory=lambda: [Norm.LINF, Norm.L2])
    sigma_scale: float = Field(1.0, gt=0.0, description="Scale applied to sigma_max(A); <1 is a negative control")
    hausdorff_models: int = Field(3, ge=0)
    hausdorff_samples: int = Field(3, ge=0)
    hausdorff: AttackConfig = Field(default_factory=lambda: AttackConfig(steps=20, restarts=2))


class PredictLossConfig(RunConfig):
    data: DataConfig
    model: ModelSource
    source: ThreatModel
    targets: list[ThreatModel] = Field(..., min_length=1)
    slopes: list[float] | None = Field(
        None, description="Expansion slope per target; default is the theoretical slope"
    )
    union_with_source: bool = True
    method: Literal["auto", "pgd", "exact_linear"] = "auto"
    attack: AttackConfig = Field(default_factory=lambda: AttackConfig(steps=100, restarts=10))
    eval_set: Split = "train"

    @model_validator(mode="after")
    def _slopes(self) -> "PredictLossConfig":
        if self.slopes is not None and len(self.slopes) != len(self.targets):
            raise ValueError("slopes must have one entry per target")
        return self


def read_document(path: str | Path) -> dict[str, Any]:
    """
    Raises:
        ConfigError: If the file cannot be read or is not a mapping
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            document = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Cannot read config {path}: {e}", {"path": str(path)}) from e
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError("Config must be a JSON object", {"path": str(path)})
    return document


def parse_config(model_cls: type[ConfigT], document: dict[str, Any], **overrides: Any) -> ConfigT:
    """
    Validate a document, applying non-None overrides at the top level.

    Raises:
        ConfigError: With the first validation problem
    """
    merged = {**document, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return model_cls.model_validate(merged)
    except ValidationError as e:
        problems = [
            {"loc": ".".join(str(p) for p in err["loc"]), "msg": err["msg"]} for err in e.errors()
        ]
        first = problems[0]
        raise ConfigError(
            f"Invalid {model_cls.__name__}: {first['loc'] or '<root>'}: {first['msg']}",
            {"errors": problems},
        ) from e


def load_config(model_cls: type[ConfigT], path: str | Path | None, **overrides: Any) -> ConfigT:
    document = read_document(path) if path is not None else {}
    return parse_config(model_cls, document, **overrides)
