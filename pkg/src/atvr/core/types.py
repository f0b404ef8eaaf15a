"""Core value types shared across modules."""

import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

VariationMethod = Literal["pgd", "exact_closed_form", "vertex_enum", "fast_lpv"]
RiskMethod = Literal["clean", "pgd", "exact_linear"]


@dataclass(frozen=True)
class SpectralStats:
    """Extreme singular values of a matrix."""

    sigma_max: float
    sigma_min: float
    condition_number: float

    @property
    def is_rank_deficient(self) -> bool:
        return math.isinf(self.condition_number)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "sigma_max": self.sigma_max,
            "sigma_min": self.sigma_min,
            "condition_number": self.condition_number,
        }


@dataclass(frozen=True)
class LossValue:
    """Cross-entropy value and its gradient with respect to the logits."""

    value: float
    grad_logits: np.ndarray


@dataclass
class VariationEstimate:
    """
    A measured or exact value of the variation V(h, N) at one anchor.

    `value` is always ||h(x1) - h(x2)||_2 recomputed from the witness pair.
    For union threat models `member_values` holds one value per member and
    `member_index` points at the member that supplied the witness.
    """

    value: float
    x1: np.ndarray
    x2: np.ndarray
    method: VariationMethod
    member_values: list[float] | None = None
    member_index: int = 0
    distances: tuple[float, float] | None = None

    def witness_norms(self, anchor: np.ndarray | None = None) -> tuple[float, float]:
        """Euclidean distance of each witness from the anchor (origin if omitted)."""
        base = np.zeros_like(self.x1) if anchor is None else anchor
        return float(np.linalg.norm(self.x1 - base)), float(np.linalg.norm(self.x2 - base))

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "value": self.value,
            "method": self.method,
            "x1": self.x1.tolist(),
            "x2": self.x2.tolist(),
            "member_values": self.member_values,
            "member_index": self.member_index,
            "distances": list(self.distances) if self.distances is not None else None,
        }


@dataclass(frozen=True)
class VariationBounds:
    """Closed-form lower/upper bounds on variation for a linear extractor."""

    upper: float
    lower: float | None = None

    def contains(self, value: float, rtol: float = 1e-9) -> bool:
        """True if value lies in [lower, upper] up to relative slack."""
        if value > self.upper * (1 + rtol) + 1e-15:
            return False
        if self.lower is not None and value < self.lower * (1 - rtol) - 1e-15:
            return False
        return True


@dataclass
class DatasetVariation:
    """Per-sample variation values over a dataset and their mean."""

    mean: float
    values: np.ndarray
    method: VariationMethod
    x1: np.ndarray | None = None
    x2: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass
class ExpansionFit:
    """Minimum-slope linear expansion function k*x over a (source, target) scatter."""

    slope: float
    points: list[tuple[float, float]]
    excluded_count: int = 0
    tight_index: int | None = None

    def __call__(self, source_variation: float) -> float:
        return self.slope * source_variation

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "slope": self.slope,
            "num_points": len(self.points),
            "excluded_count": self.excluded_count,
            "tight_index": self.tight_index,
        }


@dataclass(frozen=True)
class RiskEstimate:
    """Empirical (adversarial) risk and worst-case accuracy."""

    mean_loss: float
    accuracy: float
    method: RiskMethod
    num_samples: int = 0
    losses: np.ndarray | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "mean_loss": self.mean_loss,
            "accuracy": self.accuracy,
            "method": self.method,
            "num_samples": self.num_samples,
        }
