"""Shared fixtures."""

import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from atvr.core.dataset import Dataset
from atvr.core.numerics import RandomSource
from atvr.experiments.data import GaussianSpec, gen_gaussian
from atvr.logging_config import initialize_logging
from atvr.models.base import Model, init_model, linear_model


@pytest.fixture(autouse=True)
def fresh_logging():
    """CliRunner swaps stderr; rebind logging to the current stream after each test."""
    yield
    initialize_logging()


@pytest.fixture
def rng() -> RandomSource:
    return RandomSource(1234)


@pytest.fixture
def linear_binary(rng: RandomSource) -> Model:
    """Binary linear model, n=4 inputs, d=6 features (full column rank)."""
    return init_model("linear", 4, 6, 2, rng, init="normal")


@pytest.fixture
def mlp_model(rng: RandomSource) -> Model:
    return init_model("mlp1", 3, 4, 3, rng, hidden_dim=5, activation="tanh")


@pytest.fixture
def margin_one_model() -> Model:
    """W = I, a_0 - a_1 = (1, 0): the clean margin of class 0 is x[0]."""
    return linear_model(np.eye(2), A=np.array([[0.5, 0.0], [-0.5, 0.0]]))


@pytest.fixture
def small_gaussian() -> Dataset:
    return gen_gaussian(GaussianSpec(n=4, sigma=0.125, samples_per_class=20), "train", seed=3)


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a run config document and return its path."""

    def _write(document: dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document, indent=2))
        return path

    return _write


@pytest.fixture
def make_linear():
    """Standard-normal linear model from its own seed."""

    def _make(seed: int, n: int, d: int, k: int = 2) -> Model:
        return init_model("linear", n, d, k, RandomSource(seed), init="normal")

    return _make
