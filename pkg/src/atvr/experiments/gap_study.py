"""
Generalization-gap and accuracy curves versus target radius, one trained
model per regularization strength (shared data and initialization).
"""

from dataclasses import dataclass, field
from typing import Any

import structlog

from atvr.core.numerics import RandomSource
from atvr.experiments.configs import GapRunConfig
from atvr.experiments.manifest import RunContext
from atvr.models.base import Model
from atvr.models.checkpoint import save_model
from atvr.threats.base import Ball
from atvr.training.evaluation import empirical_adv_risk
from atvr.training.trainer import LOG_COLUMNS, at_vr_train
from atvr.variation.union import dataset_variation

logger = structlog.get_logger(__name__)

GAP_COLUMNS = [
    "lam",
    "target_norm",
    "target_eps",
    "source_loss",
    "target_loss",
    "gap",
    "clean_acc",
    "source_acc",
    "target_acc",
    "source_variation",
]
TRAIN_LOG_COLUMNS = ["lam", *LOG_COLUMNS]


@dataclass
class GapStudyResult:
    rows: list[dict[str, Any]] = field(default_factory=list)
    models: dict[float, Model] = field(default_factory=dict)
    train_log: list[dict[str, Any]] = field(default_factory=list)

    def gap_at(self, lam: float, norm: str, eps: float) -> float:
        for row in self.rows:
            if row["lam"] == lam and row["target_norm"] == norm and row["target_eps"] == eps:
                return row["gap"]
        raise KeyError((lam, norm, eps))


def run_gap_study(cfg: GapRunConfig, ctx: RunContext | None = None) -> GapStudyResult:
    train_data = cfg.data.load("train", cfg.seed)
    eval_data = train_data if cfg.eval_set == "train" else cfg.data.load("test", cfg.seed)
    init = cfg.model.build(train_data.input_dim, RandomSource(cfg.seed))
    source = cfg.train.source
    attack = cfg.attack.model_copy(update={"seed": cfg.seed})
    result = GapStudyResult()

    for lam in cfg.lam_grid:
        trained = at_vr_train(init, train_data, cfg.train.model_copy(update={"lam": lam, "seed": cfg.seed}))
        model = trained.model
        result.models[lam] = model
        result.train_log.extend({"lam": lam, **row} for row in trained.log_rows())

        clean = empirical_adv_risk(model, eval_data, source, attack, method="clean")
        source_risk = empirical_adv_risk(model, eval_data, source, attack, cfg.method)
        variation = dataset_variation(model, eval_data, source, attack).mean
        for norm in cfg.target_norms:
            for eps in cfg.target_eps:
                target = source.union(Ball(p=norm, eps=eps))
                risk = empirical_adv_risk(model, eval_data, target, attack, cfg.method)
                result.rows.append(
                    {
                        "lam": lam,
                        "target_norm": norm.value,
                        "target_eps": eps,
                        "source_loss": source_risk.mean_loss,
                        "target_loss": risk.mean_loss,
                        "gap": risk.mean_loss - source_risk.mean_loss,
                        "clean_acc": clean.accuracy,
                        "source_acc": source_risk.accuracy,
                        "target_acc": risk.accuracy,
                        "source_variation": variation,
                    }
                )
        logger.info(
            "Gap study model done",
            lam=lam,
            clean_acc=clean.accuracy,
            source_loss=source_risk.mean_loss,
            source_variation=variation,
        )
        if ctx is not None:
            ctx.record_file(save_model(model, ctx.path(f"model_lam{lam:g}.json")))

    if ctx is not None:
        ctx.write_csv("gap.csv", GAP_COLUMNS, result.rows)
        ctx.write_csv("train_log.csv", TRAIN_LOG_COLUMNS, result.train_log)
        for norm in cfg.target_norms:
            for metric, label in (("gap", "generalization gap"), ("target_acc", "robust accuracy")):
                svg = ctx.svg(
                    f"{metric}_l{norm.value}.svg",
                    f"{label}, target {source.label} ∪ l{norm.value}(eps)",
                    "target eps",
                    label,
                )
                svg.emit_many(
                    {"series": f"lambda={row['lam']:g}", "kind": "line", "x": row["target_eps"], "y": row[metric]}
                    for row in result.rows
                    if row["target_norm"] == norm.value
                )
                ctx.write_svg(svg)
    return result
