"""Tests for AT-VR training, the optimizer and risk evaluation."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

import atvr.training.trainer as trainer_module
from atvr.attacks.config import AttackConfig
from atvr.attacks.pgd import pgd_attack_batch
from atvr.core.dataset import Dataset
from atvr.core.errors import InvalidInputError, NumericError, TrainingDivergedError
from atvr.core.numerics import RandomSource
from atvr.models.base import init_model
from atvr.models.objectives import Batch, CrossEntropyObjective, Objective
from atvr.threats.base import Ball, ThreatModel
from atvr.training.config import TrainConfig
from atvr.training.evaluation import empirical_adv_risk, gap_curve, resolve_method
from atvr.training.optim import SGDMomentum
from atvr.training.trainer import LOG_COLUMNS, at_vr_train, batch_streams, epoch_batches

pytestmark = pytest.mark.unit


def _config(**overrides) -> TrainConfig:
    settings = {
        "lam": 0.5,
        "epochs": 3,
        "learning_rate": 0.1,
        "source": {"p": "inf", "eps": 0.02},
        "attack": {"steps": 3},
        "variation": {"steps": 3},
        "seed": 5,
    }
    settings.update(overrides)
    return TrainConfig.model_validate(settings)


@pytest.fixture
def init(small_gaussian):
    return init_model("linear", small_gaussian.input_dim, 5, 2, RandomSource(2))


class TestSGDMomentum:
    """Tests for heavy-ball SGD."""

    def test_two_steps(self):
        optimizer = SGDMomentum(0.1, 0.9)
        params = {"w": np.array([1.0, 2.0])}
        grads = {"w": np.array([1.0, 1.0])}
        first = optimizer.step(params, grads)
        np.testing.assert_allclose(first["w"], [0.9, 1.9])
        second = optimizer.step(first, grads)
        np.testing.assert_allclose(second["w"], [0.71, 1.71])

    def test_does_not_mutate_inputs(self):
        params = {"w": np.ones(2)}
        SGDMomentum(0.5).step(params, {"w": np.ones(2)})
        np.testing.assert_array_equal(params["w"], np.ones(2))

    @pytest.mark.parametrize("lr, momentum", [(0.0, 0.9), (0.1, 1.0), (0.1, -0.1)])
    def test_rejects_bad_settings(self, lr, momentum):
        with pytest.raises(InvalidInputError):
            SGDMomentum(lr, momentum)


class TestBatching:
    """Tests for epoch batching and per-step streams."""

    def test_full_batch_keeps_order(self):
        (batch,) = epoch_batches(6, None, seed=0, epoch=3)
        np.testing.assert_array_equal(batch, np.arange(6))

    def test_minibatches_cover_a_permutation(self):
        batches = epoch_batches(10, 3, seed=1, epoch=0)
        assert [len(b) for b in batches] == [3, 3, 3, 1]
        assert sorted(np.concatenate(batches).tolist()) == list(range(10))

    def test_epochs_shuffle_differently(self):
        a = np.concatenate(epoch_batches(20, 5, seed=1, epoch=0))
        b = np.concatenate(epoch_batches(20, 5, seed=1, epoch=1))
        assert not np.array_equal(a, b)
        np.testing.assert_array_equal(a, np.concatenate(epoch_batches(20, 5, seed=1, epoch=0)))

    def test_streams_depend_on_step(self):
        attack_a, variation_a = batch_streams(3, 0, 0)
        attack_b, _ = batch_streams(3, 0, 1)
        assert attack_a.keys != attack_b.keys
        assert attack_a.keys != variation_a.keys


class TestTrainConfig:
    """Tests for TrainConfig validation."""

    def test_lambda_alias(self):
        cfg = TrainConfig.model_validate({"lambda": 0.25, "source": {"p": 2, "eps": 0.1}})
        assert cfg.lam == 0.25
        assert cfg.model_dump(by_alias=True)["lambda"] == 0.25

    def test_rejects_negative_lambda(self):
        with pytest.raises(ValidationError):
            TrainConfig.model_validate({"lambda": -1.0, "source": {"p": 2, "eps": 0.1}})

    def test_rejects_unknown_field(self):
        with pytest.raises(ValidationError):
            TrainConfig.model_validate({"source": {"p": 2, "eps": 0.1}, "weight_decay": 0.1})


class TestTrainer:
    """Tests for at_vr_train."""

    def test_zero_epochs_returns_init(self, init, small_gaussian):
        result = at_vr_train(init, small_gaussian, _config(epochs=0))
        assert result.log == []
        for name in init.param_names():
            np.testing.assert_array_equal(result.model.params[name], init.params[name])

    def test_log_rows(self, init, small_gaussian):
        result = at_vr_train(init, small_gaussian, _config())
        rows = result.log_rows()
        assert [row["epoch"] for row in rows] == [0, 1, 2]
        assert all(list(row) == LOG_COLUMNS for row in rows)
        assert all(row["variation"] > 0 for row in rows)
        assert all(row["adv_loss"] >= row["clean_loss"] - 1e-12 for row in rows)
        assert result.model.metadata["epoch"] == 3

    def test_deterministic(self, init, small_gaussian):
        cfg = _config(batch_size=16)
        a = at_vr_train(init, small_gaussian, cfg)
        b = at_vr_train(init, small_gaussian, cfg)
        for name in init.param_names():
            np.testing.assert_array_equal(a.model.params[name], b.model.params[name])
        assert a.log_rows() == b.log_rows()

    def test_zero_lambda_is_plain_adversarial_training(self, init, small_gaussian):
        cfg = _config(lam=0.0, batch_size=10)
        result = at_vr_train(init, small_gaussian, cfg)

        model = init.copy()
        optimizer = SGDMomentum(cfg.learning_rate, cfg.momentum)
        for epoch in range(cfg.epochs):
            for b, idx in enumerate(epoch_batches(len(small_gaussian), cfg.batch_size, cfg.seed, epoch)):
                x, y = small_gaussian.x[idx], small_gaussian.y[idx]
                attack_rng, _ = batch_streams(cfg.seed, epoch, b)
                x_adv, _ = pgd_attack_batch(model, x, y, cfg.source, cfg.attack, attack_rng)
                _, grads = CrossEntropyObjective().value_and_grad(model, Batch(x_adv, y))
                model = model.with_params(optimizer.step(model.params, grads))

        for name in init.param_names():
            np.testing.assert_array_equal(result.model.params[name], model.params[name])

    def test_learns_gaussian_task(self, init, small_gaussian):
        result = at_vr_train(init, small_gaussian, _config(epochs=100, lam=0.1))
        risk = empirical_adv_risk(result.model, small_gaussian, ThreatModel.ball(2, 0.0), method="clean")
        assert risk.accuracy >= 0.85

    def test_checkpoints(self, init, small_gaussian):
        result = at_vr_train(init, small_gaussian, _config(epochs=5, checkpoint_every=2))
        assert [m.metadata["epoch"] for m in result.checkpoints] == [2, 4]

    def test_fast_lpv_witnesses(self, init, small_gaussian):
        cfg = _config(epochs=2, variation_source="fast_lpv", distance="random_linear")
        result = at_vr_train(init, small_gaussian, cfg)
        assert all(row["variation"] > 0 for row in result.log_rows())

    def test_divergence(self, init, small_gaussian, monkeypatch):
        class Exploding(Objective):
            def value_and_grad(self, model, batch):
                return math.nan, {name: np.zeros_like(model.params[name]) for name in model.param_names()}

        monkeypatch.setattr(trainer_module, "at_vr_objective", lambda lam, x1, x2: Exploding())
        with pytest.raises(TrainingDivergedError) as exc:
            at_vr_train(init, small_gaussian, _config())
        assert exc.value.details["epoch"] == 0
        assert exc.value.error_code == "TRAINING_DIVERGED"
        assert isinstance(exc.value.__cause__, NumericError)

    def test_non_finite_gradient_diverges(self, init, small_gaussian, monkeypatch):
        class InfiniteGradient(Objective):
            def value_and_grad(self, model, batch):
                grads = {name: np.zeros_like(model.params[name]) for name in model.param_names()}
                grads[model.param_names()[0]].flat[0] = math.inf
                return 1.0, grads

        monkeypatch.setattr(trainer_module, "at_vr_objective", lambda lam, x1, x2: InfiniteGradient())
        with pytest.raises(TrainingDivergedError) as exc:
            at_vr_train(init, small_gaussian, _config())
        assert exc.value.details["objective"] == 1.0
        assert exc.value.details["batch"] == 0

    def test_rejects_dimension_mismatch(self, small_gaussian):
        model = init_model("linear", 3, 5, 2, RandomSource(0))
        with pytest.raises(InvalidInputError):
            at_vr_train(model, small_gaussian, _config())

    def test_rejects_extra_classes(self, init):
        data = Dataset(x=np.zeros((3, 4)), y=np.array([0, 1, 2]))
        with pytest.raises(InvalidInputError):
            at_vr_train(init, data, _config())


class TestEvaluation:
    """Tests for empirical risk and gap curves."""

    def test_resolve_method(self, linear_binary, mlp_model):
        assert resolve_method(linear_binary, "auto") == "exact_linear"
        assert resolve_method(mlp_model, "auto") == "pgd"
        assert resolve_method(mlp_model, "clean") == "clean"

    def test_zero_radius_equals_clean(self, linear_binary, small_gaussian):
        clean = empirical_adv_risk(linear_binary, small_gaussian, ThreatModel.ball(2, 0.0), method="clean")
        exact = empirical_adv_risk(linear_binary, small_gaussian, ThreatModel.ball(2, 0.0), method="exact_linear")
        assert exact.mean_loss == pytest.approx(clean.mean_loss, rel=1e-12)
        assert clean.num_samples == len(small_gaussian)

    def test_exact_dominates_pgd(self, linear_binary, small_gaussian):
        tm = ThreatModel.ball(2, 0.1)
        exact = empirical_adv_risk(linear_binary, small_gaussian, tm, method="exact_linear")
        pgd = empirical_adv_risk(linear_binary, small_gaussian, tm, AttackConfig(steps=10), method="pgd")
        assert exact.mean_loss >= pgd.mean_loss - 1e-9
        assert exact.accuracy <= pgd.accuracy

    def test_empty_dataset(self, linear_binary):
        with pytest.raises(InvalidInputError):
            empirical_adv_risk(linear_binary, Dataset(x=np.zeros((0, 4)), y=np.zeros(0)), ThreatModel.ball(2, 0.1))

    def test_gap_curve(self, linear_binary, small_gaussian):
        source = ThreatModel.ball("inf", 0.01)
        targets = [source.union(Ball(p=2, eps=eps)) for eps in (0.01, 0.05, 0.2)]
        rows = gap_curve(linear_binary, small_gaussian, source, targets)
        assert [row.label for row in rows] == [t.label for t in targets]
        gaps = [row.gap for row in rows]
        assert all(g >= -1e-12 for g in gaps)
        assert gaps == sorted(gaps)
        assert rows[0].to_dict()["source_loss"] == rows[1].source_loss
