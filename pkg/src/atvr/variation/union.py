"""
Variation over threat-model unions and over datasets.

The variation of a union is the maximum of its member variations; the
witness comes from the member that attains it.
"""

from collections.abc import Sequence
from typing import Literal

import numpy as np
import structlog

from atvr.attacks.config import AttackConfig
from atvr.core.dataset import Dataset
from atvr.core.errors import InvalidInputError, UnsupportedModelError
from atvr.core.numerics import RandomSource
from atvr.core.types import DatasetVariation, VariationEstimate
from atvr.models.base import Model, features
from atvr.threats.base import Ball, ThreatModel
from atvr.variation.exact import exact_available, variation_exact_linear
from atvr.variation.pgd import variation_pgd_batch

logger = structlog.get_logger(__name__)

EstimationMethod = Literal["auto", "pgd", "exact"]


def _member_batch(
    model: Model,
    x: np.ndarray,
    ball: Ball,
    cfg: AttackConfig,
    method: EstimationMethod,
    rng: RandomSource,
    sample_ids: Sequence[int] | np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, str]:
    """Per-row values and witnesses for one member ball."""
    use_exact = method == "exact" or (
        method == "auto" and model.is_linear and exact_available(model.input_dim, ball)
    )
    if use_exact:
        if not model.is_linear:
            raise UnsupportedModelError("Exact variation needs a linear extractor", {"kind": model.kind})
        estimate = variation_exact_linear(model.W, ball)
        values = np.full(x.shape[0], estimate.value)
        return values, x + estimate.x1, x + estimate.x2, estimate.method
    values, x1, x2 = variation_pgd_batch(model, x, ball, cfg, rng, sample_ids)
    return values, x1, x2, "pgd"


def _union_batch(
    model: Model,
    x: np.ndarray,
    tm: ThreatModel | Ball,
    cfg: AttackConfig,
    method: EstimationMethod,
    rng: RandomSource | None,
    sample_ids: Sequence[int] | np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[np.ndarray], np.ndarray, list[str]]:
    members = [tm] if isinstance(tm, Ball) else tm.members
    root = rng if rng is not None else RandomSource(cfg.seed)
    best_values: np.ndarray | None = None
    member_values: list[np.ndarray] = []
    tags: list[str] = []
    for index, ball in enumerate(members):
        values, x1, x2, tag = _member_batch(model, x, ball, cfg, method, root.substream(index), sample_ids)
        member_values.append(values)
        tags.append(tag)
        if best_values is None:
            best_values, best_x1, best_x2 = values.copy(), x1.copy(), x2.copy()
            best_index = np.zeros(x.shape[0], dtype=np.int64)
            continue
        better = values > best_values
        best_values[better] = values[better]
        best_x1[better] = x1[better]
        best_x2[better] = x2[better]
        best_index[better] = index
    assert best_values is not None
    return best_values, best_x1, best_x2, member_values, best_index, tags


def union_variation(
    model: Model,
    x: np.ndarray,
    tm: ThreatModel | Ball,
    cfg: AttackConfig,
    method: EstimationMethod = "auto",
    rng: RandomSource | None = None,
) -> VariationEstimate:
    """
    Variation at one anchor over a threat model: the max of member values.

    method "auto" uses exact values for linear extractors where available
    and variation PGD otherwise; "exact" refuses to fall back.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError("union_variation expects a single anchor")
    values, x1, x2, member_values, best_index, tags = _union_batch(model, x[None, :], tm, cfg, method, rng)
    index = int(best_index[0])
    per_member = [float(v[0]) for v in member_values]
    return VariationEstimate(
        value=float(values[0]),
        x1=x1[0],
        x2=x2[0],
        method=tags[index],  # type: ignore[arg-type]
        member_values=per_member if len(per_member) > 1 else None,
        member_index=index,
    )


def dataset_variation(
    model: Model,
    data: Dataset | np.ndarray,
    tm: ThreatModel | Ball,
    cfg: AttackConfig,
    method: EstimationMethod = "auto",
    rng: RandomSource | None = None,
) -> DatasetVariation:
    """
    Mean per-sample variation over a dataset.

    Exact methods give every sample the same anchor-independent value.

    Raises:
        InvalidInputError: On an empty dataset
    """
    x = data.x if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=np.float64))
    if x.shape[0] == 0:
        raise InvalidInputError("Cannot measure variation of an empty dataset")
    values, x1, x2, _, _, tags = _union_batch(model, x, tm, cfg, method, rng)
    tag = "pgd" if "pgd" in tags else tags[0]
    mean = float(np.mean(values))
    logger.info("Dataset variation", samples=x.shape[0], method=tag, mean=mean)
    return DatasetVariation(mean=mean, values=values, method=tag, x1=x1, x2=x2)  # type: ignore[arg-type]


def witness_value(model: Model, estimate: VariationEstimate) -> float:
    """||h(x1) - h(x2)||_2 recomputed from an estimate's witnesses."""
    return float(np.linalg.norm(features(model, estimate.x1) - features(model, estimate.x2)))


def union_variation_batch(
    model: Model,
    x: np.ndarray,
    tm: ThreatModel | Ball,
    cfg: AttackConfig,
    method: EstimationMethod = "pgd",
    rng: RandomSource | None = None,
    sample_ids: Sequence[int] | np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-row union variation and witnesses: (values (m,), x1 (m, n), x2 (m, n)).

    sample_ids key the per-row PGD streams; they default to row positions.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    values, x1, x2, _, _, _ = _union_batch(model, x, tm, cfg, method, rng, sample_ids)
    return values, x1, x2
