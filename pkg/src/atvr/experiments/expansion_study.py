"""
Expansion-function scatter: source versus target variation over a family
of feature extractors, with the minimum-slope fit and the theoretical slope.
"""

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import structlog

from atvr.attacks.config import AttackConfig
from atvr.core.numerics import RandomSource, svd_spectrum
from atvr.core.types import ExpansionFit
from atvr.experiments.configs import ExpansionRunConfig
from atvr.experiments.manifest import RunContext
from atvr.expansion.fit import fit_min_slope
from atvr.expansion.slopes import SlopeFormula, theoretical_slope_cross_norm
from atvr.models.base import Model, init_model
from atvr.threats.base import ThreatModel
from atvr.training.trainer import at_vr_train
from atvr.utils.parallel import parallel_map
from atvr.variation.union import dataset_variation, union_variation

logger = structlog.get_logger(__name__)

SCATTER_COLUMNS = ["model_id", "source_variation", "target_variation", "condition_number"]


@dataclass
class ExpansionStudyResult:
    rows: list[dict[str, Any]]
    fit: ExpansionFit
    theoretical_slope: float | None
    max_condition: float

    def summary(self) -> dict[str, Any]:
        return {
            **self.fit.to_dict(),
            "theoretical_slope": self.theoretical_slope,
            "max_condition_number": self.max_condition,
        }


def sample_random_models(num_models: int, input_dim: int, feature_dim: int, seed: int) -> list[Model]:
    """Linear extractors with standard-normal W and b1 (binary classifier attached)."""
    root = RandomSource(seed)
    return [
        init_model("linear", input_dim, feature_dim, 2, root.substream(i), init="normal")
        for i in range(num_models)
    ]


def trajectory_models(cfg: ExpansionRunConfig) -> list[Model]:
    """Snapshots taken every few epochs while training across a lambda grid."""
    traj = cfg.trajectory
    assert traj is not None
    data = traj.data.load("train", cfg.seed)
    init = traj.model.build(data.input_dim, RandomSource(cfg.seed))
    models: list[Model] = []
    for lam in traj.lam_grid:
        train_cfg = traj.train.model_copy(
            update={"lam": lam, "seed": cfg.seed, "checkpoint_every": traj.train.checkpoint_every or 10}
        )
        models.extend(at_vr_train(init, data, train_cfg).checkpoints)
    return models


def measured_target(cfg: ExpansionRunConfig) -> ThreatModel:
    return cfg.source.union(cfg.target) if cfg.union_with_source else cfg.target


def model_variation(
    model: Model, tm: ThreatModel, attack: AttackConfig, rng: RandomSource, anchors: np.ndarray | None = None
) -> float:
    """
    Variation of one extractor: exact (or PGD at the origin) for linear
    models, where it does not depend on the anchor; mean over anchors otherwise.
    """
    if model.is_linear:
        return union_variation(model, np.zeros(model.input_dim), tm, attack, rng=rng).value
    assert anchors is not None
    return dataset_variation(model, anchors, tm, attack, method="pgd", rng=rng).mean


def theoretical_slope(cfg: ExpansionRunConfig, n: int, B: float) -> float | None:
    """Largest cross-norm slope over target members; None for a union source."""
    if not cfg.source.is_single or not math.isfinite(B):
        return None
    src = cfg.source.members[0]
    if src.eps == 0.0:
        return None
    slopes = [
        theoretical_slope_cross_norm(SlopeFormula(p=src.p, q=ball.p, eps1=src.eps, eps2=ball.eps, n=n, B=B))
        for ball in cfg.target.members
    ]
    return max(slopes)


def run_expansion_study(cfg: ExpansionRunConfig, ctx: RunContext | None = None) -> ExpansionStudyResult:
    if cfg.sampling == "random_normal":
        models = sample_random_models(cfg.num_models, cfg.input_dim, cfg.feature_dim, cfg.seed)
        anchors = None
    else:
        models = trajectory_models(cfg)
        assert cfg.trajectory is not None
        anchors = cfg.trajectory.data.load("train", cfg.seed).head(64).x

    target = measured_target(cfg)
    root = RandomSource(cfg.seed).substream(1)
    threads = ctx.threads if ctx else 1

    def measure(i: int) -> dict[str, Any]:
        model = models[i]
        stream = root.for_sample(i)
        cond = svd_spectrum(model.W).condition_number if model.is_linear else math.nan
        return {
            "model_id": i,
            "source_variation": model_variation(model, cfg.source, cfg.attack, stream.substream(0), anchors),
            "target_variation": model_variation(model, target, cfg.attack, stream.substream(1), anchors),
            "condition_number": cond,
        }

    rows = parallel_map(measure, range(len(models)), threads=threads)
    fit = fit_min_slope([(r["source_variation"], r["target_variation"]) for r in rows], cfg.zero_tol)
    conds = [r["condition_number"] for r in rows if not math.isnan(r["condition_number"])]
    max_cond = max(conds) if conds else math.nan
    theory = theoretical_slope(cfg, models[0].input_dim, max_cond) if conds else None
    result = ExpansionStudyResult(rows=rows, fit=fit, theoretical_slope=theory, max_condition=max_cond)
    logger.info(
        "Expansion study",
        models=len(models),
        slope=fit.slope,
        theoretical_slope=theory,
        source=cfg.source.label,
        target=target.label,
    )

    if ctx is not None:
        ctx.write_csv("expansion.csv", SCATTER_COLUMNS, rows)
        ctx.write_json("expansion_fit.json", result.summary())
        svg = ctx.svg(
            "expansion.svg",
            f"{cfg.source.label} -> {target.label}",
            "source variation",
            "target variation",
        )
        svg.emit_many({"series": "models", "x": r["source_variation"], "y": r["target_variation"]} for r in rows)
        x_max = max(r["source_variation"] for r in rows)
        svg.emit_many(
            {"series": f"fit k={fit.slope:.3g}", "kind": "line", "x": x, "y": fit.slope * x} for x in (0.0, x_max)
        )
        if theory is not None:
            svg.emit_many(
                {"series": f"theory k={theory:.3g}", "kind": "line", "x": x, "y": theory * x} for x in (0.0, x_max)
            )
        ctx.write_svg(svg)
    return result
