"""Two isotropic Gaussians in [0, 1]^n, the synthetic binary benchmark."""

from typing import Literal

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from atvr.core.dataset import Dataset
from atvr.core.numerics import RandomSource

logger = structlog.get_logger(__name__)

Split = Literal["train", "test"]
CLASS_MEANS = (0.25, 0.75)
_SPLIT_KEYS = {"train": 0, "test": 1}


class GaussianSpec(BaseModel):
    """
    Class k ~ N(theta_k, sigma^2 I_n) with theta_0 = (0.25, 0, ..., 0) and
    theta_1 = (0.75, 0, ..., 0), clipped to [0, 1]. seed=None uses the run seed.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(25, ge=1, description="Input dimension")
    sigma: float = Field(0.125, gt=0.0)
    samples_per_class: int = Field(1000, ge=1)
    seed: int | None = Field(None, ge=0)


def class_mean(label: int, n: int) -> np.ndarray:
    mean = np.zeros(n)
    mean[0] = CLASS_MEANS[label]
    return mean


def gen_gaussian(spec: GaussianSpec, split: Split = "train", seed: int = 0) -> Dataset:
    """
    2 * samples_per_class labeled points: class 0 first, then class 1.

    Train and test splits draw from independent streams of the same seed.
    """
    data_seed = spec.seed if spec.seed is not None else seed
    rng = RandomSource(data_seed).substream(_SPLIT_KEYS[split])
    parts_x, parts_y = [], []
    for label in (0, 1):
        noise = rng.substream(label).normal((spec.samples_per_class, spec.n), spec.sigma)
        parts_x.append(np.clip(class_mean(label, spec.n) + noise, 0.0, 1.0))
        parts_y.append(np.full(spec.samples_per_class, label, dtype=np.int64))
    dataset = Dataset(
        x=np.vstack(parts_x),
        y=np.concatenate(parts_y),
        name=f"gaussian-{split}",
        metadata={**spec.model_dump(), "seed": data_seed, "split": split},
    )
    logger.debug("Generated Gaussian data", split=split, n=spec.n, samples=len(dataset), seed=data_seed)
    return dataset
