"""Labeled real-vector datasets."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from atvr.core.errors import InvalidInputError, SchemaError


@dataclass
class Dataset:
    """Labeled vectors: x has shape (m, n), y holds m class indices."""

    x: np.ndarray
    y: np.ndarray
    name: str = "dataset"
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.x.ndim != 2:
            raise InvalidInputError("Dataset inputs must be a 2-D array", {"shape": self.x.shape})
        if self.y.shape != (self.x.shape[0],):
            raise InvalidInputError(
                "Dataset labels must match the number of inputs",
                {"x_shape": self.x.shape, "y_shape": self.y.shape},
            )
        if not np.all(np.isfinite(self.x)):
            raise InvalidInputError("Dataset inputs must be finite")

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.x.shape[1])

    @property
    def num_classes(self) -> int:
        return int(self.y.max()) + 1 if len(self) else 0

    def subset(self, indices: np.ndarray | list[int]) -> "Dataset":
        """Rows selected by index, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(x=self.x[idx], y=self.y[idx], name=self.name, metadata=dict(self.metadata))

    def head(self, count: int) -> "Dataset":
        """First `count` rows (all rows if count exceeds the size)."""
        return self.subset(np.arange(min(count, len(self))))

    def to_frame(self) -> pd.DataFrame:
        """Columns x0..x{n-1} followed by y."""
        frame = pd.DataFrame(self.x, columns=[f"x{i}" for i in range(self.input_dim)])
        frame["y"] = self.y
        return frame

    def save_csv(self, path: str | Path) -> Path:
        """Write the dataset as CSV (header row, no index)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        return path


def load_dataset_csv(path: str | Path, name: str | None = None) -> Dataset:
    """
    Load a dataset written by `Dataset.save_csv`.

    Raises:
        SchemaError: If the file is missing columns or holds non-numeric values
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as e:
        raise SchemaError(str(path), str(e)) from e

    feature_cols = [c for c in frame.columns if c != "y"]
    if "y" not in frame.columns or not feature_cols:
        raise SchemaError(str(path), "expected feature columns x0..x{n-1} and a 'y' column")
    try:
        x = frame[feature_cols].to_numpy(dtype=np.float64)
        y = frame["y"].to_numpy(dtype=np.int64)
        return Dataset(x=x, y=y, name=name or path.stem)
    except (ValueError, InvalidInputError) as e:
        raise SchemaError(str(path), str(e)) from e
