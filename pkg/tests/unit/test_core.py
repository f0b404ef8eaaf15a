"""Tests for core types, errors, settings and logging setup."""

import json
import logging
import math
import time

import numpy as np
import pytest
import structlog

from atvr.config.settings import LoggingSettings, RuntimeSettings
from atvr.core.errors import (
    AtvrError,
    ConfigError,
    InvalidDistanceError,
    InvalidInputError,
    SchemaError,
    TrainingDivergedError,
)
from atvr.core.types import ExpansionFit, RiskEstimate, SpectralStats, VariationBounds, VariationEstimate
from atvr.logging_config import initialize_logging
from atvr.utils.parallel import parallel_map

pytestmark = pytest.mark.unit


def test_spectral_stats_rank_deficient():
    """Test that an infinite condition number marks rank deficiency."""
    assert SpectralStats(2.0, 0.0, math.inf).is_rank_deficient
    assert not SpectralStats(2.0, 1.0, 2.0).is_rank_deficient
    assert SpectralStats(2.0, 1.0, 2.0).to_dict()["condition_number"] == 2.0


def test_variation_bounds_contains():
    """Test interval membership with relative slack."""
    bounds = VariationBounds(upper=1.0, lower=0.5)
    assert bounds.contains(1.0 + 1e-12)
    assert not bounds.contains(1.01)
    assert not bounds.contains(0.4)
    assert VariationBounds(upper=1.0).contains(0.0)


def test_variation_estimate_to_dict():
    """Test serialization and witness norms."""
    estimate = VariationEstimate(value=1.0, x1=np.array([3.0, 4.0]), x2=np.zeros(2), method="pgd")
    assert estimate.witness_norms() == (5.0, 0.0)
    assert estimate.witness_norms(np.array([3.0, 4.0])) == (0.0, 5.0)
    document = estimate.to_dict()
    assert document["x1"] == [3.0, 4.0]
    assert document["distances"] is None


def test_expansion_fit_call():
    """Test that a fit maps source variation to a target bound."""
    fit = ExpansionFit(slope=3.0, points=[(1.0, 3.0)], tight_index=0)
    assert fit(0.5) == 1.5
    assert fit.to_dict() == {"slope": 3.0, "num_points": 1, "excluded_count": 0, "tight_index": 0}


def test_risk_estimate_ignores_losses_in_equality():
    """Test that per-sample losses do not affect comparisons."""
    a = RiskEstimate(mean_loss=0.1, accuracy=1.0, method="clean", num_samples=2, losses=np.zeros(2))
    b = RiskEstimate(mean_loss=0.1, accuracy=1.0, method="clean", num_samples=2)
    assert a == b


@pytest.mark.parametrize("threads", [1, 4])
def test_parallel_map_keeps_order(threads):
    """Test that results come back in input order."""
    def slow_square(i):
        time.sleep(0.001 * (5 - i))
        return i * i

    assert parallel_map(slow_square, range(5), threads=threads) == [0, 1, 4, 9, 16]


class TestErrors:
    """Tests for the error hierarchy."""

    def test_to_dict(self):
        """Test error serialization."""
        error = InvalidInputError("bad shape", {"shape": [2, 3]})
        assert error.to_dict() == {
            "error": "InvalidInputError",
            "error_code": "INVALID_INPUT",
            "message": "bad shape",
            "details": {"shape": [2, 3]},
        }

    def test_hierarchy(self):
        """Test subclass relationships and codes."""
        assert isinstance(InvalidDistanceError("x"), InvalidInputError)
        assert InvalidDistanceError("x").error_code == "INVALID_DISTANCE"
        diverged = TrainingDivergedError(epoch=2, batch=1, objective=math.nan)
        assert diverged.details["epoch"] == 2
        assert all(issubclass(cls, AtvrError) for cls in (ConfigError, SchemaError))

    def test_schema_error_names_path(self):
        """Test that schema errors carry the offending path."""
        error = SchemaError("model.json", "missing W")
        assert "model.json" in str(error)
        assert error.details == {"path": "model.json"}


class TestSettings:
    """Tests for environment-driven settings."""

    def test_runtime_from_environment(self, monkeypatch):
        """Test ATVR_ variables."""
        monkeypatch.setenv("ATVR_SEED", "9")
        monkeypatch.setenv("ATVR_THREADS", "4")
        settings = RuntimeSettings()
        assert (settings.seed, settings.threads) == (9, 4)

    def test_log_level_is_case_insensitive(self, monkeypatch):
        """Test LOG_LEVEL normalization."""
        monkeypatch.setenv("LOG_LEVEL", "debug")
        assert LoggingSettings().level == "DEBUG"

    def test_rejects_negative_seed(self, monkeypatch):
        """Test validation of runtime settings."""
        monkeypatch.setenv("ATVR_SEED", "-1")
        with pytest.raises(ValueError):
            RuntimeSettings()


class TestLogging:
    """Tests for logging initialization."""

    def test_level_applied(self):
        """Test that the root level follows the settings."""
        initialize_logging(LoggingSettings(level="WARNING"))
        assert logging.getLogger().level == logging.WARNING

    def test_file_export(self, tmp_path):
        """Test JSON-lines export."""
        initialize_logging(LoggingSettings(level="INFO", export_logs=True, dir=str(tmp_path), file="run.log"))
        structlog.get_logger("atvr.test").info("Export check", seed=3)
        for handler in logging.getLogger().handlers:
            handler.flush()
        lines = (tmp_path / "run.log").read_text().splitlines()
        entries = [json.loads(line) for line in lines]
        assert any("Export check" in entry["message"] and entry["level"] == "INFO" for entry in entries)

    def test_json_format(self, capsys):
        """Test that the json renderer emits parseable lines."""
        initialize_logging(LoggingSettings(level="INFO", format="json"))
        structlog.get_logger("atvr.test").info("Json check", value=1)
        line = capsys.readouterr().err.strip().splitlines()[-1]
        assert json.loads(line)["event"] == "Json check"
