"""Core types, errors, datasets and numerics."""

from atvr.core.dataset import Dataset, load_dataset_csv
from atvr.core.errors import (
    AtvrError,
    CapacityError,
    ConfigError,
    DegenerateInputError,
    InvalidDistanceError,
    InvalidInputError,
    NumericError,
    SchemaError,
    TrainingDivergedError,
    UnsupportedModelError,
)
from atvr.core.numerics import RandomSource, finite_diff_check, svd_spectrum
from atvr.core.types import (
    DatasetVariation,
    ExpansionFit,
    RiskEstimate,
    SpectralStats,
    VariationBounds,
    VariationEstimate,
)

__all__ = [
    "AtvrError",
    "CapacityError",
    "ConfigError",
    "Dataset",
    "DatasetVariation",
    "DegenerateInputError",
    "ExpansionFit",
    "InvalidDistanceError",
    "InvalidInputError",
    "NumericError",
    "RandomSource",
    "RiskEstimate",
    "SchemaError",
    "SpectralStats",
    "TrainingDivergedError",
    "UnsupportedModelError",
    "VariationBounds",
    "VariationEstimate",
    "finite_diff_check",
    "load_dataset_csv",
    "svd_spectrum",
]
