"""Generated datasets for offline checks: XOR and one informative feature among noise."""

from pathlib import Path

import numpy as np
import pandas as pd

from src.core.exceptions import DatasetError
from src.core.logger import logger
from src.models.dataset import Dataset, RawTable
from src.schemas.dataset import ColumnKind, ColumnSpec, DatasetSchema
from src.services.dataset_service import encode

SYNTH_STREAM = 3
CLASS_COLUMN = "class"


def _schema_for(frame: pd.DataFrame) -> DatasetSchema:
    columns = [
        ColumnSpec(
            name=name,
            kind=ColumnKind.NOMINAL if name == CLASS_COLUMN else ColumnKind.CONTINUOUS,
        )
        for name in frame.columns
    ]
    return DatasetSchema(columns=columns, class_column=CLASS_COLUMN)


def xor_frame(repeats: int = 1) -> tuple[pd.DataFrame, DatasetSchema]:
    if repeats < 1:
        raise DatasetError("repeats must be at least 1")
    base = pd.DataFrame(
        {"a": [0.0, 0.0, 1.0, 1.0], "b": [0.0, 1.0, 0.0, 1.0], CLASS_COLUMN: ["0", "1", "1", "0"]}
    )
    frame = pd.concat([base] * repeats, ignore_index=True)
    return frame, _schema_for(frame)


def informative_frame(
    n_instances: int = 200,
    n_noise: int = 9,
    noise_std: float = 0.5,
    seed: int = 0,
) -> tuple[pd.DataFrame, DatasetSchema]:
    """
    Binary class with feature x0 = class + N(0, noise_std^2); the remaining
    n_noise features are N(0, 1) draws independent of the class.

    Args:
            n_instances: number of rows, at least 4
            n_noise: number of pure-noise features
            noise_std: spread added to the informative feature
            seed: generator seed

    Returns:
            frame with columns x0..x{n_noise}, class, and its schema
    """
    if n_instances < 4:
        raise DatasetError("an informative dataset needs at least 4 instances")
    if n_noise < 0 or noise_std < 0:
        raise DatasetError("n_noise and noise_std must be non-negative")

    rng = np.random.default_rng([seed, SYNTH_STREAM])
    # both classes always present
    labels = rng.permutation(np.arange(n_instances) % 2)
    columns = {"x0": labels + rng.normal(0.0, noise_std, size=n_instances)}
    for k in range(1, n_noise + 1):
        columns[f"x{k}"] = rng.normal(0.0, 1.0, size=n_instances)
    columns[CLASS_COLUMN] = [str(label) for label in labels]
    frame = pd.DataFrame(columns)
    return frame, _schema_for(frame)


def to_raw(frame: pd.DataFrame, schema: DatasetSchema) -> RawTable:
    names = tuple(column.name for column in schema.columns)
    return RawTable(
        column_names=names,
        column_kinds=tuple(column.kind for column in schema.columns),
        columns=tuple(tuple(str(cell) for cell in frame[name]) for name in names),
        class_column=names.index(schema.class_column),
    )


def to_dataset(frame: pd.DataFrame, schema: DatasetSchema) -> Dataset:
    """Encode a generated frame exactly as loading its written CSV would."""
    return encode(to_raw(frame, schema))


def write_synthetic(
    frame: pd.DataFrame, schema: DatasetSchema, csv_path: Path | str, schema_path: Path | str
) -> None:
    frame.to_csv(csv_path, index=False, lineterminator="\n")
    Path(schema_path).write_text(schema.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Wrote {len(frame)} synthetic rows to {csv_path}")
