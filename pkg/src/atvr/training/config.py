"""Training configuration."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from atvr.attacks.config import AttackConfig
from atvr.threats.base import ThreatModel


class TrainConfig(BaseModel):
    """
    Adversarial training with variation regularization.

    lam=0 is plain adversarial training on the source threat model.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lam: float = Field(0.0, ge=0.0, alias="lambda", description="Variation regularization strength")
    epochs: int = Field(200, ge=0)
    batch_size: int | None = Field(None, ge=1, description="None trains on the full batch")
    learning_rate: float = Field(0.1, gt=0.0)
    momentum: float = Field(0.9, ge=0.0, lt=1.0)
    source: ThreatModel
    attack: AttackConfig = Field(default_factory=AttackConfig)
    variation: AttackConfig = Field(default_factory=AttackConfig)
    variation_source: Literal["pgd", "fast_lpv"] = "pgd"
    distance: Literal["l2", "random_linear"] = Field(
        "l2", description="Distance used when variation_source is fast_lpv"
    )
    lpv_eps: float | None = Field(
        None, ge=0.0, description="Fast-LPV radius; defaults to the source's largest radius"
    )
    checkpoint_every: int | None = Field(
        None, ge=1, description="Keep a model snapshot every k epochs"
    )
    seed: int = Field(0, ge=0)
