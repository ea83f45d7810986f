import os
import tempfile

# keep test runs from writing into the working tree's log directory
os.environ.setdefault("CANN_LOG_DIR", tempfile.mkdtemp(prefix="cann-logs-"))

import json  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from src.models.dataset import Dataset  # noqa: E402
from src.schemas.dataset import ColumnKind, FeatureMeta  # noqa: E402
from src.services import synthetic_service  # noqa: E402


def _continuous_meta(name: str) -> FeatureMeta:
    return FeatureMeta(
        source_column=name,
        kind=ColumnKind.CONTINUOUS,
        minimum=0.0,
        maximum=1.0,
        impute_value=0.5,
    )


@pytest.fixture
def make_dataset():
    """Build a Dataset straight from a feature matrix and integer labels."""

    def _make(features, labels, n_classes=None) -> Dataset:
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=int)
        n_classes = n_classes or int(labels.max()) + 1
        return Dataset(
            features=features,
            targets=np.eye(n_classes)[labels],
            feature_meta=tuple(_continuous_meta(f"f{k}") for k in range(features.shape[1])),
            class_labels=tuple(str(c) for c in range(n_classes)),
        )

    return _make


@pytest.fixture
def random_dataset(make_dataset):
    def _make(n_instances=12, n_features=3, n_classes=2, seed=0) -> Dataset:
        rng = np.random.default_rng(seed)
        labels = np.arange(n_instances) % n_classes
        features = rng.random((n_instances, n_features))
        return make_dataset(features, rng.permutation(labels), n_classes)

    return _make


@pytest.fixture
def xor_dataset() -> Dataset:
    return synthetic_service.to_dataset(*synthetic_service.xor_frame())


@pytest.fixture
def informative_dataset() -> Dataset:
    frame, schema = synthetic_service.informative_frame(n_instances=100, n_noise=3, seed=1)
    return synthetic_service.to_dataset(frame, schema)


@pytest.fixture
def write_table(tmp_path):
    """Write CSV text and a schema dict to tmp_path; returns (csv_path, schema_path)."""

    def _write(text: str, schema: dict, name: str = "table"):
        csv_path = tmp_path / f"{name}.csv"
        schema_path = tmp_path / f"{name}.schema.json"
        csv_path.write_text(text, encoding="utf-8")
        schema_path.write_text(json.dumps(schema), encoding="utf-8")
        return csv_path, schema_path

    return _write


@pytest.fixture
def synthetic_files(tmp_path):
    """Informative synthetic dataset written as CSV + schema."""
    frame, schema = synthetic_service.informative_frame(n_instances=40, n_noise=3, seed=2)
    csv_path = tmp_path / "synthetic.csv"
    schema_path = tmp_path / "synthetic.schema.json"
    synthetic_service.write_synthetic(frame, schema, csv_path, schema_path)
    return csv_path, schema_path
