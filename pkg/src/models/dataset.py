import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.schemas.dataset import ColumnKind, FeatureMeta


@dataclass(frozen=True)
class RawTable:
    """Tabular data as read from disk; a missing cell is None."""

    column_names: tuple[str, ...]
    column_kinds: tuple[ColumnKind, ...]
    columns: tuple[tuple[Optional[str], ...], ...]
    class_column: int

    def __post_init__(self):
        if not self.columns or len({len(c) for c in self.columns}) != 1 or not self.columns[0]:
            raise ValueError("all columns must have the same length >= 1")
        if not len(self.column_names) == len(self.column_kinds) == len(self.columns):
            raise ValueError("column names, kinds and cells disagree in length")
        if not 0 <= self.class_column < len(self.columns):
            raise ValueError(f"class column index {self.class_column} out of range")
        if self.column_kinds[self.class_column] != ColumnKind.NOMINAL:
            raise ValueError("class column must be nominal")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0])

    @property
    def feature_columns(self) -> list[int]:
        return [i for i in range(len(self.columns)) if i != self.class_column]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Fully numeric instance matrix with one-hot targets."""

    features: np.ndarray  # N x K, values in [0, 1]
    targets: np.ndarray  # N x C, one-hot rows
    feature_meta: tuple[FeatureMeta, ...]
    class_labels: tuple[str, ...]
    class_column: str = "class"

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        targets = np.array(self.targets, dtype=np.float64)
        if features.ndim != 2 or targets.ndim != 2 or features.shape[0] != targets.shape[0]:
            raise ValueError("features and targets must be 2-D with matching row counts")
        if features.shape[1] != len(self.feature_meta):
            raise ValueError("one feature_meta record is required per encoded column")
        if targets.shape[1] != len(self.class_labels):
            raise ValueError("one class label is required per target column")
        features.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.targets.shape[1]

    @property
    def feature_names(self) -> list[str]:
        return [meta.name for meta in self.feature_meta]

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.targets, axis=1)

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.features.tobytes())
        digest.update(self.targets.tobytes())
        digest.update("\x1f".join(self.feature_names).encode())
        digest.update("\x1f".join(self.class_labels).encode())
        return digest.hexdigest()


@dataclass(frozen=True)
class Split:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int
    train_fraction: float
