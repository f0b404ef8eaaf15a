"""CLI entry point for atvr experiments."""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
import structlog
import typer
from pydantic import BaseModel

from atvr.config.settings import get_settings
from atvr.core.errors import AtvrError, ConfigError, SchemaError
from atvr.core.numerics import RandomSource
from atvr.experiments.configs import (
    EvalConfig,
    ExpansionRunConfig,
    GapRunConfig,
    GenDataConfig,
    HausdorffRunConfig,
    PredictLossConfig,
    TrainRunConfig,
    VariationRunConfig,
    VerifyConfig,
    parse_config,
    read_document,
)
from atvr.experiments.data import gen_gaussian
from atvr.experiments.expansion_study import run_expansion_study
from atvr.experiments.gap_study import run_gap_study
from atvr.experiments.manifest import RunContext
from atvr.experiments.predict_loss import run_predict_loss
from atvr.experiments.verify import run_verify
from atvr.expansion.bounds import CE_LIPSCHITZ, hausdorff_gap_bound, variation_gap_bound
from atvr.logging_config import initialize_logging
from atvr.models.base import classifier_lipschitz
from atvr.models.checkpoint import save_model
from atvr.training.evaluation import empirical_adv_risk
from atvr.training.trainer import LOG_COLUMNS, at_vr_train
from atvr.variation.distances import build_distance
from atvr.variation.exact import variation_bounds
from atvr.variation.fast_lpv import fast_lpv_batch
from atvr.variation.hausdorff import HausdorffConfig, dataset_hausdorff
from atvr.variation.union import dataset_variation

logger = structlog.get_logger(__name__)

app = typer.Typer(help="atvr - threat-model generalization: variation, expansion slopes and AT-VR training")

ConfigT = TypeVar("ConfigT", bound=BaseModel)

EXIT_INVARIANT_FAILURE = 1
EXIT_CONFIG_ERROR = 2


@dataclass
class CliState:
    config: Path | None
    seed: int | None
    out_dir: Path | None
    threads: int


@app.callback()
def main(
    ctx: typer.Context,
    config: Path | None = typer.Option(None, "--config", "-c", help="Path to the run config (JSON or YAML)"),
    seed: int | None = typer.Option(None, "--seed", min=0, help="Override the config seed"),
    out_dir: Path | None = typer.Option(None, "--out-dir", "-o", help="Output directory for this run"),
    threads: int | None = typer.Option(None, "--threads", min=1, help="Worker threads for per-model maps"),
) -> None:
    """Global options shared by every subcommand."""
    initialize_logging()
    settings = get_settings().runtime
    ctx.obj = CliState(
        config=config,
        seed=seed,
        out_dir=out_dir,
        threads=threads or settings.threads,
    )


def _load(state: CliState, model_cls: type[ConfigT]) -> ConfigT:
    """Seed precedence: --seed, then the document, then ATVR_SEED."""
    document = read_document(state.config) if state.config is not None else {}
    seed = state.seed
    if seed is None and "seed" not in document:
        seed = get_settings().runtime.seed
    return parse_config(model_cls, document, seed=seed)


def _context(state: CliState, kind: str, cfg: Any) -> RunContext:
    out_dir = state.out_dir or get_settings().runtime.out_dir / kind
    return RunContext(kind, out_dir, cfg, cfg.seed, state.threads)


def _run(command: Any) -> Any:
    """Map library errors to exit codes."""
    try:
        return command()
    except (ConfigError, SchemaError) as e:
        typer.echo(f"Config error: {e.message}", err=True)
        raise typer.Exit(code=EXIT_CONFIG_ERROR) from e
    except AtvrError as e:
        logger.error("Run failed", **e.to_dict())
        typer.echo(f"Error [{e.error_code}]: {e.message}", err=True)
        raise typer.Exit(code=1) from e


@app.command("gen-data")
def gen_data(ctx: typer.Context) -> None:
    """Generate the two-Gaussian dataset and write one CSV per split."""

    def command() -> None:
        cfg = _load(ctx.obj, GenDataConfig)
        run = _context(ctx.obj, "gen-data", cfg)
        for split in cfg.splits:
            data = gen_gaussian(cfg.data, split, cfg.seed)
            run.record_file(data.save_csv(run.path(f"{split}.csv")))
            typer.echo(f"{split}: {len(data)} samples, n={data.input_dim}")
        run.finish(splits=list(cfg.splits))

    _run(command)


@app.command()
def train(ctx: typer.Context) -> None:
    """Train one model with adversarial training plus variation regularization."""

    def command() -> None:
        cfg = _load(ctx.obj, TrainRunConfig)
        run = _context(ctx.obj, "train", cfg)
        data = cfg.data.load("train", cfg.seed)
        init = cfg.model.build(data.input_dim, RandomSource(cfg.seed))
        result = at_vr_train(init, data, cfg.train.model_copy(update={"seed": cfg.seed}))

        run.record_file(save_model(result.model, run.path("model.json")))
        for snapshot in result.checkpoints:
            run.record_file(save_model(snapshot, run.path(f"checkpoint_epoch{snapshot.metadata['epoch']}.json")))
        rows = result.log_rows()
        run.write_csv("train_log.csv", LOG_COLUMNS, rows)
        if rows:
            svg = run.svg("train_log.svg", f"training, lambda={cfg.train.lam:g}", "epoch", "loss")
            for column in ("clean_loss", "adv_loss", "variation"):
                svg.emit_many({"series": column, "kind": "line", "x": r["epoch"], "y": r[column]} for r in rows)
            run.write_svg(svg)
        final = rows[-1] if rows else {}
        run.finish(**final)
        typer.echo(f"Trained {cfg.train.epochs} epochs: " + ", ".join(f"{k}={v:.4g}" for k, v in final.items()))

    _run(command)


@app.command("eval")
def evaluate(ctx: typer.Context) -> None:
    """Empirical adversarial risk and worst-case accuracy per threat model."""

    def command() -> None:
        cfg = _load(ctx.obj, EvalConfig)
        run = _context(ctx.obj, "eval", cfg)
        data = cfg.data.load(cfg.eval_set, cfg.seed)
        model = cfg.model.load(data.input_dim, cfg.seed)
        attack = cfg.attack.model_copy(update={"seed": cfg.seed})
        rows = []
        for tm in cfg.threat_models:
            risk = empirical_adv_risk(model, data, tm, attack, cfg.method)
            rows.append({"threat_model": tm.label, **risk.to_dict()})
            typer.echo(f"{tm.label}: loss={risk.mean_loss:.6g} acc={risk.accuracy:.4f} ({risk.method})")
        run.write_csv("eval.csv", ["threat_model", "method", "mean_loss", "accuracy", "num_samples"], rows)
        run.finish(eval_set=cfg.eval_set)

    _run(command)


@app.command()
def variation(ctx: typer.Context) -> None:
    """Per-sample variation of the feature extractor over a threat model."""

    def command() -> None:
        cfg = _load(ctx.obj, VariationRunConfig)
        run = _context(ctx.obj, "variation", cfg)
        data = cfg.data.load(cfg.eval_set, cfg.seed)
        model = cfg.model.load(data.input_dim, cfg.seed)
        attack = cfg.attack.model_copy(update={"seed": cfg.seed})
        tm = cfg.threat_model

        if cfg.method == "fast_lpv":
            distance = build_distance(cfg.distance, data.input_dim, seed=cfg.seed)
            values, x1, x2 = fast_lpv_batch(
                model, distance, data.x, tm.max_eps, attack.steps, RandomSource(cfg.seed)
            )
            method = "fast_lpv"
        else:
            result = dataset_variation(model, data, tm, attack, cfg.method)
            values, x1, x2, method = result.values, result.x1, result.x2, result.method
        assert x1 is not None and x2 is not None

        norms1 = np.linalg.norm(x1 - data.x, axis=1)
        norms2 = np.linalg.norm(x2 - data.x, axis=1)
        rows = [
            {
                "sample_id": i,
                "method": method,
                "p": "|".join(b.p.value for b in tm.members),
                "eps": "|".join(f"{b.eps:g}" for b in tm.members),
                "value": float(values[i]),
                "witness_norms": f"{norms1[i]!r};{norms2[i]!r}",
            }
            for i in range(len(data))
        ]
        run.write_csv("variation.csv", ["sample_id", "method", "p", "eps", "value", "witness_norms"], rows)
        summary: dict[str, Any] = {"mean": float(np.mean(values)), "method": method}
        if model.is_linear:
            bounds = variation_bounds(model.W, tm)
            summary.update(upper_bound=bounds.upper, lower_bound=bounds.lower)
        run.write_json("variation_summary.json", summary)
        run.finish(**summary)
        typer.echo(f"Variation over {tm.label}: mean={summary['mean']:.6g} ({method})")

    _run(command)


@app.command()
def expansion(ctx: typer.Context) -> None:
    """Source versus target variation scatter with the minimum-slope fit."""

    def command() -> None:
        cfg = _load(ctx.obj, ExpansionRunConfig)
        run = _context(ctx.obj, "expansion", cfg)
        result = run_expansion_study(cfg, run)
        run.finish(**result.summary())
        theory = result.theoretical_slope
        typer.echo(
            f"Fitted slope {result.fit.slope:.4g} over {len(result.rows)} models"
            + (f", theoretical {theory:.4g}" if theory is not None else "")
        )

    _run(command)


@app.command()
def gap(ctx: typer.Context) -> None:
    """Generalization gap and robust accuracy versus target radius, per lambda."""

    def command() -> None:
        cfg = _load(ctx.obj, GapRunConfig)
        run = _context(ctx.obj, "gap", cfg)
        result = run_gap_study(cfg, run)
        largest = max(cfg.target_eps)
        summary = {
            f"gap_lam{lam:g}_l{norm.value}": result.gap_at(lam, norm.value, largest)
            for lam in cfg.lam_grid
            for norm in cfg.target_norms
        }
        run.finish(**summary)
        for key, value in summary.items():
            typer.echo(f"{key} (eps={largest:g}): {value:.6g}")

    _run(command)


@app.command()
def hausdorff(ctx: typer.Context) -> None:
    """Feature-space Hausdorff distance between target and source, per sample."""

    def command() -> None:
        cfg = _load(ctx.obj, HausdorffRunConfig)
        run = _context(ctx.obj, "hausdorff", cfg)
        data = cfg.data.load(cfg.eval_set, cfg.seed)
        model = cfg.model.load(data.input_dim, cfg.seed)
        attack = cfg.attack.model_copy(update={"seed": cfg.seed})
        hcfg = HausdorffConfig(inner_steps=cfg.inner_steps, inner_restarts=cfg.inner_restarts, samples=cfg.samples)
        values = dataset_hausdorff(model, data.x, cfg.source, cfg.target, attack, hcfg, run.threads)
        target_values = dataset_variation(model, data, cfg.target, attack).values
        sigma_g = classifier_lipschitz(model)
        rows = [
            {
                "sample_id": i,
                "hausdorff": float(values[i]),
                "target_variation": float(target_values[i]),
                "hausdorff_bound": hausdorff_gap_bound(CE_LIPSCHITZ, sigma_g, float(values[i])),
                "variation_bound": variation_gap_bound(CE_LIPSCHITZ, sigma_g, float(target_values[i])),
            }
            for i in range(len(data))
        ]
        run.write_csv(
            "hausdorff.csv",
            ["sample_id", "hausdorff", "target_variation", "hausdorff_bound", "variation_bound"],
            rows,
        )
        summary = {"mean_hausdorff": float(np.mean(values)), "mean_target_variation": float(np.mean(target_values))}
        run.finish(**summary)
        typer.echo(f"Hausdorff {cfg.target.label} -> {cfg.source.label}: mean={summary['mean_hausdorff']:.6g}")

    _run(command)


@app.command("verify-bounds")
def verify_bounds_command(ctx: typer.Context) -> None:
    """Check the generalization bounds against exact oracles; exit 1 on any failure."""

    def command() -> bool:
        cfg = _load(ctx.obj, VerifyConfig)
        run = _context(ctx.obj, "verify-bounds", cfg)
        report = run_verify(cfg, run)
        document = report.to_dict()
        run.finish(passed=report.passed)
        for name, check in document["checks"].items():
            status = "PASS" if check["passed"] else "FAIL"
            typer.echo(f"{status} {name}: {check['failures']}/{check['instances']} failures")
        return report.passed

    if not _run(command):
        raise typer.Exit(code=EXIT_INVARIANT_FAILURE)


@app.command("predict-loss")
def predict_loss(ctx: typer.Context) -> None:
    """Predict target adversarial loss from source loss and variation, and compare."""

    def command() -> None:
        cfg = _load(ctx.obj, PredictLossConfig)
        run = _context(ctx.obj, "predict-loss", cfg)
        rows = run_predict_loss(cfg, run)
        run.finish(targets=len(rows))
        for row in rows:
            typer.echo(
                f"{row['target']}: predicted={row['predicted_target_loss']:.6g} "
                f"measured={row['true_target_loss']:.6g} slope={row['slope']:.4g}"
            )

    _run(command)


if __name__ == "__main__":
    app()
