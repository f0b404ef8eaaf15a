"""Tests for PGD attacks and the exact linear oracle."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from atvr.attacks.config import AttackConfig, evaluation_attack
from atvr.attacks.exact import (
    exact_adv_loss_linear,
    exact_adv_loss_linear_batch,
    exact_adv_margin_linear,
)
from atvr.attacks.pgd import pgd_attack, pgd_attack_batch
from atvr.core.errors import InvalidInputError, UnsupportedModelError
from atvr.core.numerics import RandomSource
from atvr.models.base import linear_model
from atvr.models.losses import loss_and_input_grad
from atvr.threats.base import Ball, ThreatModel
from atvr.threats.projection import contains_rows

pytestmark = pytest.mark.unit


@pytest.fixture
def inputs(linear_binary):
    rng = RandomSource(77)
    x = rng.substream(0).normal((12, linear_binary.input_dim))
    y = rng.substream(1).integers(0, 2, 12)
    return x, y


class TestAttackConfig:
    """Tests for AttackConfig."""

    def test_default_step(self):
        assert AttackConfig().step_for(Ball(p="inf", eps=0.09)) == pytest.approx(0.01)

    def test_explicit_step(self):
        assert AttackConfig(step_size=0.5).step_for(Ball(p=2, eps=0.09)) == 0.5

    def test_rejects_inverted_box(self):
        with pytest.raises(ValidationError):
            AttackConfig(clip_box=(1.0, 0.0))

    def test_rejects_unknown_field(self):
        with pytest.raises(ValidationError):
            AttackConfig(iterations=3)

    def test_vertex_starts(self):
        assert AttackConfig().vertex_starts_for(Ball(p="inf", eps=0.1)) == 8
        assert AttackConfig(vertex_starts=2).vertex_starts_for(Ball(p=1, eps=0.1)) == 2
        assert AttackConfig(vertex_starts=2).vertex_starts_for(Ball(p=2, eps=0.1)) == 0

    def test_evaluation_settings(self):
        cfg = evaluation_attack(seed=4)
        assert (cfg.steps, cfg.restarts, cfg.seed) == (100, 10, 4)


class TestExactOracle:
    """Tests for the closed-form binary linear worst case."""

    def test_linf_example(self, margin_one_model):
        loss = exact_adv_loss_linear(margin_one_model, np.array([1.0, 0.3]), 0, ThreatModel.ball("inf", 0.1))
        assert loss == pytest.approx(math.log1p(math.exp(-0.9)), abs=1e-12)
        assert loss == pytest.approx(0.341153, abs=1e-6)

    def test_union_takes_worst_member(self, margin_one_model):
        tm = ThreatModel.ball("inf", 0.1).union(Ball(p=2, eps=0.5))
        assert exact_adv_margin_linear(margin_one_model, np.array([1.0, 0.0]), 0, tm) == pytest.approx(0.5)

    def test_zero_radius_is_clean(self, linear_binary, inputs):
        x, y = inputs
        clean, _ = loss_and_input_grad(linear_binary, x, y)
        exact = exact_adv_loss_linear_batch(linear_binary, x, y, ThreatModel.ball(2, 0.0))
        np.testing.assert_allclose(exact, clean, rtol=1e-12)

    def test_rejects_multiclass(self, mlp_model):
        with pytest.raises(UnsupportedModelError):
            exact_adv_loss_linear(mlp_model, np.zeros(3), 0, ThreatModel.ball(2, 0.1))

    def test_rejects_bad_labels(self, linear_binary):
        with pytest.raises(InvalidInputError):
            exact_adv_loss_linear(linear_binary, np.zeros(4), 2, ThreatModel.ball(2, 0.1))


class TestPGD:
    """Tests for projected gradient ascent."""

    def test_zero_steps_returns_clean(self, linear_binary, inputs):
        x, y = inputs
        x_adv, losses = pgd_attack_batch(linear_binary, x, y, ThreatModel.ball("inf", 0.1), AttackConfig(steps=0))
        clean, _ = loss_and_input_grad(linear_binary, x, y)
        np.testing.assert_array_equal(x_adv, x)
        np.testing.assert_array_equal(losses, clean)

    def test_zero_radius_returns_clean(self, linear_binary, inputs):
        x, y = inputs
        x_adv, _ = pgd_attack_batch(linear_binary, x, y, ThreatModel.ball(2, 0.0), AttackConfig(steps=5))
        np.testing.assert_array_equal(x_adv, x)

    def test_constant_model(self):
        model = linear_model(np.zeros((2, 2)), A=np.zeros((2, 2)))
        _, loss = pgd_attack(model, np.array([0.4, 0.1]), 1, ThreatModel.ball("inf", 0.3), AttackConfig(steps=10))
        assert loss == pytest.approx(math.log(2), abs=1e-15)

    def test_margin_example(self, margin_one_model):
        _, loss = pgd_attack(
            margin_one_model, np.array([1.0, 0.3]), 0, ThreatModel.ball("inf", 0.1), AttackConfig(steps=20)
        )
        assert loss == pytest.approx(0.341153, abs=1e-6)

    def test_linf_matches_exact_on_linear(self, linear_binary, inputs):
        x, y = inputs
        tm = ThreatModel.ball("inf", 0.05)
        _, losses = pgd_attack_batch(linear_binary, x, y, tm, AttackConfig(steps=20))
        exact = exact_adv_loss_linear_batch(linear_binary, x, y, tm)
        np.testing.assert_allclose(losses, exact, atol=1e-6)

    @pytest.mark.parametrize("p", ["1", "2", "inf"])
    def test_never_exceeds_exact(self, linear_binary, inputs, p):
        x, y = inputs
        tm = ThreatModel.ball(p, 0.2)
        _, losses = pgd_attack_batch(linear_binary, x, y, tm, AttackConfig(steps=15, restarts=2))
        exact = exact_adv_loss_linear_batch(linear_binary, x, y, tm)
        assert np.all(exact >= losses - 1e-9)

    @pytest.mark.parametrize("p", ["1", "2", "inf"])
    def test_result_is_feasible(self, mlp_model, p):
        x = RandomSource(3).normal((6, 3))
        y = np.array([0, 1, 2, 0, 1, 2])
        tm = ThreatModel.ball(p, 0.3)
        x_adv, _ = pgd_attack_batch(mlp_model, x, y, tm, AttackConfig(steps=10))
        assert np.all(contains_rows(x_adv, x, tm, tol=1e-9))

    def test_keep_best_not_below_clean(self, mlp_model):
        x = RandomSource(5).normal((6, 3))
        y = np.zeros(6, dtype=int)
        clean, _ = loss_and_input_grad(mlp_model, x, y)
        _, losses = pgd_attack_batch(mlp_model, x, y, ThreatModel.ball(2, 0.2), AttackConfig(steps=5))
        assert np.all(losses >= clean)

    def test_union_at_least_first_member(self, linear_binary, inputs):
        x, y = inputs
        cfg = AttackConfig(steps=10)
        single = ThreatModel.ball("inf", 0.05)
        _, member_losses = pgd_attack_batch(linear_binary, x, y, single, cfg, RandomSource(1))
        _, union_losses = pgd_attack_batch(
            linear_binary, x, y, single.union(Ball(p=2, eps=0.3)), cfg, RandomSource(1)
        )
        assert np.all(union_losses >= member_losses)

    def test_deterministic(self, mlp_model):
        x = RandomSource(8).normal((4, 3))
        y = np.array([0, 1, 2, 1])
        cfg = AttackConfig(steps=5, restarts=3, seed=11)
        a = pgd_attack_batch(mlp_model, x, y, ThreatModel.ball(1, 0.4), cfg)
        b = pgd_attack_batch(mlp_model, x, y, ThreatModel.ball(1, 0.4), cfg)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_clip_box(self, linear_binary):
        x = np.full((3, 4), 0.98)
        cfg = AttackConfig(steps=5, clip_box=(0.0, 1.0))
        x_adv, _ = pgd_attack_batch(linear_binary, x, np.array([0, 1, 0]), ThreatModel.ball("inf", 0.1), cfg)
        assert np.all((x_adv >= 0.0) & (x_adv <= 1.0))

    def test_batch_size_mismatch(self, linear_binary):
        with pytest.raises(InvalidInputError):
            pgd_attack_batch(linear_binary, np.zeros((2, 4)), np.array([0]), ThreatModel.ball(2, 0.1), AttackConfig())

    def test_single_requires_vector(self, linear_binary):
        with pytest.raises(InvalidInputError):
            pgd_attack(linear_binary, np.zeros((2, 4)), 0, ThreatModel.ball(2, 0.1), AttackConfig())

    @pytest.mark.parametrize("steps, step_size", [(1, 1e-9), (5, None)])
    def test_batch_rows_match_single_calls(self, linear_binary, inputs, steps, step_size):
        x, y = inputs[0][:3], inputs[1][:3]
        tm = ThreatModel.ball("inf", 0.3)
        cfg = AttackConfig(steps=steps, step_size=step_size, restarts=1, seed=7)
        batch_x, batch_losses = pgd_attack_batch(linear_binary, x, y, tm, cfg)
        for i in range(3):
            single_x, single_loss = pgd_attack(linear_binary, x[i], int(y[i]), tm, cfg, sample_index=i)
            np.testing.assert_allclose(batch_x[i], single_x, rtol=1e-10, atol=1e-12)
            assert batch_losses[i] == pytest.approx(single_loss, rel=1e-10)

    def test_rows_follow_their_sample_ids(self, mlp_model):
        x = RandomSource(8).normal((4, 3))
        y = np.array([0, 1, 2, 1])
        tm = ThreatModel.ball(2, 0.4)
        cfg = AttackConfig(steps=4, restarts=2, seed=3)
        forward, _ = pgd_attack_batch(mlp_model, x, y, tm, cfg, sample_ids=[10, 11, 12, 13])
        backward, _ = pgd_attack_batch(mlp_model, x[::-1], y[::-1], tm, cfg, sample_ids=[13, 12, 11, 10])
        np.testing.assert_allclose(backward[::-1], forward, rtol=1e-10, atol=1e-12)

    def test_sample_ids_must_match_rows(self, linear_binary, inputs):
        x, y = inputs
        with pytest.raises(InvalidInputError):
            pgd_attack_batch(linear_binary, x, y, ThreatModel.ball(2, 0.1), AttackConfig(), sample_ids=[0, 1])

    def test_wrong_input_dimension(self, linear_binary):
        with pytest.raises(InvalidInputError):
            pgd_attack_batch(
                linear_binary, np.zeros((2, 3)), np.array([0, 1]), ThreatModel.ball(2, 0.1), AttackConfig()
            )
