"""Tests for datasets, Gaussian data and run configuration documents."""

import json
from pathlib import Path

import numpy as np
import pytest

from atvr.core.dataset import Dataset, load_dataset_csv
from atvr.core.errors import ConfigError, InvalidInputError, SchemaError
from atvr.experiments.configs import (
    DataConfig,
    EvalConfig,
    ExpansionRunConfig,
    GapRunConfig,
    GenDataConfig,
    HausdorffRunConfig,
    ModelSource,
    PredictLossConfig,
    TrainRunConfig,
    VariationRunConfig,
    VerifyConfig,
    load_config,
    parse_config,
    read_document,
)
from atvr.experiments.data import GaussianSpec, gen_gaussian
from atvr.threats.base import Norm

pytestmark = pytest.mark.unit


class TestGaussianData:
    """Tests for the synthetic two-Gaussian task."""

    def test_shape_and_labels(self):
        data = gen_gaussian(GaussianSpec(n=6, samples_per_class=50), "train", seed=1)
        assert data.x.shape == (100, 6)
        assert data.y.tolist() == [0] * 50 + [1] * 50
        assert np.all((data.x >= 0.0) & (data.x <= 1.0))
        assert data.name == "gaussian-train"

    def test_class_means(self):
        data = gen_gaussian(GaussianSpec(n=3, samples_per_class=400), "train", seed=2)
        assert data.x[data.y == 0, 0].mean() == pytest.approx(0.25, abs=0.02)
        assert data.x[data.y == 1, 0].mean() == pytest.approx(0.75, abs=0.02)

    def test_reproducible(self):
        spec = GaussianSpec(n=4, samples_per_class=10)
        np.testing.assert_array_equal(gen_gaussian(spec, "train", 7).x, gen_gaussian(spec, "train", 7).x)

    def test_splits_are_independent(self):
        spec = GaussianSpec(n=4, samples_per_class=10)
        assert not np.array_equal(gen_gaussian(spec, "train", 7).x, gen_gaussian(spec, "test", 7).x)

    def test_spec_seed_overrides_run_seed(self):
        spec = GaussianSpec(n=4, samples_per_class=10, seed=11)
        data = gen_gaussian(spec, "train", seed=0)
        np.testing.assert_array_equal(data.x, gen_gaussian(spec, "train", seed=99).x)
        assert data.metadata["seed"] == 11


class TestDataset:
    """Tests for Dataset and its CSV form."""

    def test_round_trip(self, tmp_path, small_gaussian):
        path = small_gaussian.save_csv(tmp_path / "data" / "train.csv")
        loaded = load_dataset_csv(path)
        np.testing.assert_allclose(loaded.x, small_gaussian.x, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(loaded.y, small_gaussian.y)
        assert loaded.name == "train"
        assert path.read_text().splitlines()[0] == "x0,x1,x2,x3,y"

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x0,x1\n0.1,0.2\n")
        with pytest.raises(SchemaError):
            load_dataset_csv(path)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x0,y\nabc,0\n")
        with pytest.raises(SchemaError):
            load_dataset_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_dataset_csv(tmp_path / "absent.csv")

    def test_label_count_mismatch(self):
        with pytest.raises(InvalidInputError):
            Dataset(x=np.zeros((3, 2)), y=np.zeros(2))

    def test_non_finite_inputs(self):
        with pytest.raises(InvalidInputError):
            Dataset(x=np.array([[np.nan]]), y=np.array([0]))

    def test_subset_and_head(self, small_gaussian):
        assert len(small_gaussian.head(5)) == 5
        assert len(small_gaussian.head(500)) == len(small_gaussian)
        picked = small_gaussian.subset([39, 0])
        assert picked.y.tolist() == [1, 0]
        assert small_gaussian.num_classes == 2


class TestConfigDocuments:
    """Tests for reading and validating run configs."""

    def test_yaml_document(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("seed: 4\nsplits: [train, test]\n")
        cfg = load_config(GenDataConfig, path)
        assert cfg.seed == 4
        assert cfg.splits == ["train", "test"]

    def test_defaults_without_file(self):
        assert load_config(GenDataConfig, None).data == GaussianSpec()

    def test_overrides_win(self, write_config):
        cfg = load_config(GenDataConfig, write_config({"seed": 4}), seed=8)
        assert cfg.seed == 8

    def test_none_override_is_ignored(self, write_config):
        assert load_config(GenDataConfig, write_config({"seed": 4}), seed=None).seed == 4

    def test_not_a_mapping(self, write_config):
        with pytest.raises(ConfigError):
            read_document(write_config([1, 2]))

    def test_unreadable(self, tmp_path):
        with pytest.raises(ConfigError):
            read_document(tmp_path / "absent.json")

    def test_malformed(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text('{"seed": [1,')
        with pytest.raises(ConfigError):
            read_document(path)

    def test_unknown_field(self):
        with pytest.raises(ConfigError) as exc:
            parse_config(GenDataConfig, {"sed": 1})
        assert exc.value.details["errors"][0]["loc"] == "sed"

    def test_train_config(self):
        document = {
            "seed": 2,
            "data": {"gaussian": {"n": 4, "samples_per_class": 5}},
            "train": {"lambda": 1.0, "source": {"union": [{"p": "inf", "eps": 0.01}, {"p": 2, "eps": 0.1}]}},
        }
        cfg = parse_config(TrainRunConfig, document)
        assert cfg.train.lam == 1.0
        assert len(cfg.train.source.members) == 2
        assert cfg.model.kind == "linear"

    @pytest.mark.parametrize(
        "data",
        [{}, {"gaussian": {"n": 2}, "path": "train.csv"}],
    )
    def test_data_needs_exactly_one_source(self, data):
        with pytest.raises(ConfigError):
            parse_config(TrainRunConfig, {"data": data, "train": {"source": {"p": 2, "eps": 0.1}}})

    def test_test_split_needs_path(self, tmp_path, small_gaussian):
        path = small_gaussian.save_csv(tmp_path / "train.csv")
        cfg = DataConfig(path=path, max_samples=7)
        assert len(cfg.load("train", seed=0)) == 7
        with pytest.raises(ConfigError):
            cfg.load("test", seed=0)

    def test_model_source_needs_exactly_one(self):
        with pytest.raises(ValueError):
            ModelSource()

    def test_model_source_builds_spec(self):
        model = ModelSource(spec={"kind": "mlp1", "hidden_dim": 3, "feature_dim": 2}).load(input_dim=4, seed=0)
        assert (model.kind, model.input_dim, model.feature_dim) == ("mlp1", 4, 2)

    def test_trajectory_sampling_needs_section(self):
        with pytest.raises(ConfigError):
            parse_config(
                ExpansionRunConfig,
                {"source": {"p": 2, "eps": 0.1}, "target": {"p": "inf", "eps": 0.1}, "sampling": "training_trajectory"},
            )

    def test_slopes_match_targets(self):
        document = {
            "data": {"gaussian": {}},
            "model": {"spec": {}},
            "source": {"p": 2, "eps": 0.1},
            "targets": [{"p": 2, "eps": 0.2}],
            "slopes": [1.0, 2.0],
        }
        with pytest.raises(ConfigError):
            parse_config(PredictLossConfig, document)

    def test_verify_defaults(self):
        cfg = parse_config(VerifyConfig, {"norms": ["inf", 2, "l1"]})
        assert cfg.norms == [Norm.LINF, Norm.L2, Norm.L1]
        with pytest.raises(ConfigError):
            parse_config(VerifyConfig, {"input_dim": 21})

    def test_dump_uses_alias(self):
        document = {"data": {"gaussian": {}}, "train": {"lam": 0.3, "source": {"p": 2, "eps": 0.1}}}
        cfg = parse_config(TrainRunConfig, document)
        dumped = json.loads(json.dumps(cfg.model_dump(mode="json", by_alias=True)))
        assert dumped["train"]["lambda"] == 0.3


EXAMPLES_DIR = Path(__file__).resolve().parents[2] / "config" / "examples"


@pytest.mark.parametrize(
    "name, model_cls",
    [
        ("gen_data.json", GenDataConfig),
        ("train.json", TrainRunConfig),
        ("eval.json", EvalConfig),
        ("variation.json", VariationRunConfig),
        ("expansion.json", ExpansionRunConfig),
        ("gap.json", GapRunConfig),
        ("hausdorff.json", HausdorffRunConfig),
        ("verify.yaml", VerifyConfig),
        ("predict_loss.json", PredictLossConfig),
    ],
)
def test_shipped_examples_validate(name, model_cls):
    """Test that every shipped example config parses."""
    cfg = load_config(model_cls, EXAMPLES_DIR / name)
    assert cfg.seed == 0
