"""Raw table ingestion, numeric encoding and seeded train/test splits."""

import re
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError
from sklearn.preprocessing import MinMaxScaler

from src.core.exceptions import (
    DatasetError,
    DegenerateClassError,
    EncodingError,
    RaggedRowError,
    SchemaMismatchError,
    SplitError,
)
from src.core.logger import logger
from src.models.dataset import Dataset, RawTable, Split
from src.schemas.dataset import ColumnKind, DatasetExport, DatasetSchema, FeatureMeta

SPLIT_STREAM = 0

_BAD_LINE = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


def load_schema(path: Path | str) -> DatasetSchema:
    try:
        return DatasetSchema.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise DatasetError(f"cannot read schema {path}: {e}") from e
    except ValidationError as e:
        raise SchemaMismatchError(f"invalid schema {path}: {e}") from e


def load_csv(path: Path | str, schema: DatasetSchema) -> RawTable:
    """
    Read a delimited file into a RawTable.

    Args:
            path: CSV file, UTF-8, optional header row
            schema: column declarations; its order is the file's column order

    Returns:
            RawTable with every cell as text, missing markers mapped to None
    """
    n_columns = len(schema.columns)
    try:
        frame = pd.read_csv(
            path,
            sep=schema.delimiter,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            engine="python",
            encoding="utf-8",
        )
    except OSError as e:
        raise DatasetError(f"cannot read {path}: {e}") from e
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"{path} is empty") from e
    except pd.errors.ParserError as e:
        match = _BAD_LINE.search(str(e))
        if match is None:
            raise DatasetError(f"cannot parse {path}: {e}") from e
        expected, row, found = (int(g) for g in match.groups())
        raise RaggedRowError(row=row, expected=expected, found=found) from e

    if frame.shape[1] != n_columns:
        raise SchemaMismatchError(
            f"schema declares {n_columns} columns but {path} has {frame.shape[1]}"
        )

    # short rows come back padded with NaN
    short_rows = np.flatnonzero(frame.isna().any(axis=1).to_numpy())
    if short_rows.size:
        position = int(short_rows[0])
        found = int(frame.iloc[position].notna().sum())
        raise RaggedRowError(row=position + 1, expected=n_columns, found=found)

    if schema.header:
        frame = frame.iloc[1:]
    if frame.empty:
        raise DatasetError(f"{path} has no data rows")

    markers = set(schema.missing_markers)
    columns = tuple(
        tuple(None if cell.strip() in markers else cell.strip() for cell in frame[position])
        for position in frame.columns
    )
    names = tuple(column.name for column in schema.columns)

    raw = RawTable(
        column_names=names,
        column_kinds=tuple(column.kind for column in schema.columns),
        columns=columns,
        class_column=names.index(schema.class_column),
    )
    logger.info(f"Loaded {raw.n_rows} rows x {n_columns} columns from {path}")
    return raw


def _parse_continuous(cells: Sequence[Optional[str]], name: str) -> np.ndarray:
    series = pd.Series([np.nan if cell is None else cell for cell in cells], dtype=object)
    values = pd.to_numeric(series, errors="coerce").to_numpy(dtype=np.float64)
    for row, (cell, value) in enumerate(zip(cells, values)):
        if cell is not None and not np.isfinite(value):
            raise EncodingError(
                f"column {name!r}, row {row + 1}: {cell!r} is not a finite number"
            )
    return values


def fit_encoding(raw: RawTable) -> tuple[list[FeatureMeta], list[str]]:
    """Derive the per-column transform and the class label order of a raw table."""
    metas: list[FeatureMeta] = []
    for index in raw.feature_columns:
        name = raw.column_names[index]
        cells = raw.columns[index]

        if raw.column_kinds[index] == ColumnKind.CONTINUOUS:
            values = _parse_continuous(cells, name)
            present = values[~np.isnan(values)]
            if present.size == 0:
                logger.warning(f"Column {name!r} has no values; encoded as a constant")
                metas.append(
                    FeatureMeta(
                        source_column=name,
                        kind=ColumnKind.CONTINUOUS,
                        minimum=0.0,
                        maximum=0.0,
                        impute_value=0.0,
                        constant=True,
                    )
                )
                continue
            scaler = MinMaxScaler().fit(values.reshape(-1, 1))
            low, high = float(scaler.data_min_[0]), float(scaler.data_max_[0])
            metas.append(
                FeatureMeta(
                    source_column=name,
                    kind=ColumnKind.CONTINUOUS,
                    minimum=low,
                    maximum=high,
                    impute_value=float(present.mean()),
                    constant=high == low,
                )
            )
        else:
            for category in sorted({cell for cell in cells if cell is not None}):
                metas.append(
                    FeatureMeta(source_column=name, kind=ColumnKind.NOMINAL, category=category)
                )
            if any(cell is None for cell in cells):
                metas.append(
                    FeatureMeta(
                        source_column=name, kind=ColumnKind.NOMINAL, is_missing_category=True
                    )
                )

    class_cells = raw.columns[raw.class_column]
    for row, cell in enumerate(class_cells):
        if cell is None:
            raise EncodingError(f"row {row + 1}: missing class label")
    labels = sorted(set(class_cells))
    if len(labels) < 2:
        raise DegenerateClassError(
            f"class column {raw.column_names[raw.class_column]!r} has a single category"
        )
    return metas, labels


def _recorded_scaler(meta: FeatureMeta) -> MinMaxScaler:
    """A clipping scaler fitted on the recorded extremes only."""
    return MinMaxScaler(clip=True).fit([[meta.minimum], [meta.maximum]])


def apply_encoding(
    raw: RawTable, feature_meta: Sequence[FeatureMeta], class_labels: Sequence[str]
) -> Dataset:
    """Re-apply a recorded transform to a raw table."""
    positions = {name: i for i, name in enumerate(raw.column_names)}
    parsed: dict[str, np.ndarray] = {}
    dummies: dict[str, pd.DataFrame] = {}
    categories: dict[str, list[str]] = {}
    for meta in feature_meta:
        if meta.kind == ColumnKind.NOMINAL and not meta.is_missing_category:
            categories.setdefault(meta.source_column, []).append(meta.category)
    encoded = np.zeros((raw.n_rows, len(feature_meta)), dtype=np.float64)

    for k, meta in enumerate(feature_meta):
        if meta.source_column not in positions:
            raise SchemaMismatchError(f"column {meta.source_column!r} is not in the table")
        cells = raw.columns[positions[meta.source_column]]

        if meta.kind == ColumnKind.CONTINUOUS:
            if meta.source_column not in parsed:
                parsed[meta.source_column] = _parse_continuous(cells, meta.source_column)
            if meta.constant:
                continue
            values = np.where(
                np.isnan(parsed[meta.source_column]),
                meta.impute_value,
                parsed[meta.source_column],
            )
            encoded[:, k] = _recorded_scaler(meta).transform(values.reshape(-1, 1))[:, 0]
            continue

        if meta.is_missing_category:
            encoded[:, k] = [cell is None for cell in cells]
            continue
        if meta.source_column not in dummies:
            # missing and unseen categories become all-zero rows
            column = pd.Categorical(cells, categories=categories[meta.source_column])
            dummies[meta.source_column] = pd.get_dummies(column, dtype=np.float64)
        encoded[:, k] = dummies[meta.source_column][meta.category].to_numpy()

    label_index = {label: i for i, label in enumerate(class_labels)}
    targets = np.zeros((raw.n_rows, len(class_labels)), dtype=np.float64)
    for row, cell in enumerate(raw.columns[raw.class_column]):
        if cell not in label_index:
            raise EncodingError(f"row {row + 1}: unknown class label {cell!r}")
        targets[row, label_index[cell]] = 1.0

    return Dataset(
        features=encoded,
        targets=targets,
        feature_meta=tuple(feature_meta),
        class_labels=tuple(class_labels),
        class_column=raw.column_names[raw.class_column],
    )


def encode(raw: RawTable) -> Dataset:
    """Min-max scale continuous columns, one-hot expand nominal ones and the class column."""
    feature_meta, class_labels = fit_encoding(raw)
    dataset = apply_encoding(raw, feature_meta, class_labels)
    flagged = [meta.name for meta in feature_meta if meta.constant]
    if flagged:
        logger.warning(f"Constant continuous columns encoded as zeros: {flagged}")
    logger.info(
        f"Encoded {dataset.n_instances} instances into {dataset.n_features} features "
        f"and {dataset.n_outputs} outputs"
    )
    return dataset


def load_dataset(csv_path: Path | str, schema_path: Path | str) -> Dataset:
    return encode(load_csv(csv_path, load_schema(schema_path)))


def split(ds: Dataset, train_fraction: float, seed: int) -> Split:
    """Seeded uniform permutation; its prefix of round(fraction * N) is the train set."""
    if not 0 < train_fraction < 1:
        raise SplitError(f"train fraction {train_fraction} is outside (0, 1)")
    n = ds.n_instances
    n_train = round(train_fraction * n)
    if n_train == 0 or n_train == n:
        raise SplitError(f"train fraction {train_fraction} leaves an empty side with N={n}")

    order = np.random.default_rng([seed, SPLIT_STREAM]).permutation(n)
    return Split(
        train_indices=tuple(int(i) for i in order[:n_train]),
        test_indices=tuple(int(i) for i in order[n_train:]),
        seed=seed,
        train_fraction=train_fraction,
    )


def subset(ds: Dataset, indices: Sequence[int]) -> Dataset:
    rows = np.asarray(indices, dtype=np.intp)
    return Dataset(
        features=ds.features[rows],
        targets=ds.targets[rows],
        feature_meta=ds.feature_meta,
        class_labels=ds.class_labels,
        class_column=ds.class_column,
    )


def select_features(ds: Dataset, feature_indices: Sequence[int]) -> Dataset:
    columns = np.asarray(feature_indices, dtype=np.intp)
    if columns.size == 0:
        raise DatasetError("feature selection must keep at least one feature")
    return Dataset(
        features=ds.features[:, columns],
        targets=ds.targets,
        feature_meta=tuple(ds.feature_meta[int(k)] for k in columns),
        class_labels=ds.class_labels,
        class_column=ds.class_column,
    )


def export_dataset(ds: Dataset, path: Path | str) -> DatasetExport:
    export = DatasetExport(
        fingerprint=ds.fingerprint(),
        n_instances=ds.n_instances,
        n_features=ds.n_features,
        n_outputs=ds.n_outputs,
        class_column=ds.class_column,
        class_labels=list(ds.class_labels),
        feature_meta=list(ds.feature_meta),
    )
    Path(path).write_text(export.model_dump_json(indent=2), encoding="utf-8")
    return export


def load_dataset_export(path: Path | str) -> DatasetExport:
    try:
        return DatasetExport.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise DatasetError(f"cannot read dataset export {path}: {e}") from e
    except ValidationError as e:
        raise DatasetError(f"invalid dataset export {path}: {e}") from e
