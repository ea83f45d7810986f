"""Sample statistics with the 1/N convention, chi-squared ranking and memoized means."""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.stats import chi2_contingency

from src.core.exceptions import (
    DegenerateClassError,
    DimensionMismatchError,
    FingerprintMismatchError,
    ImportanceError,
    MeanTableError,
)
from src.core.logger import logger
from src.models.dataset import Dataset
from src.models.stats import CorrelationReport, FeatureScore
from src.schemas.importance import ImportanceEntry, ImportanceFile, ImportanceScope

DEFAULT_CHI2_BINS = 10


def _paired(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatchError(f"length mismatch: {x.shape} vs {y.shape}")
    return x, y


def population_std(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Standard deviation with divisor N; exactly 0 for constant columns."""
    values = np.asarray(values, dtype=np.float64)
    std = values.std(axis=axis)
    return np.where(np.ptp(values, axis=axis) == 0, 0.0, std)


def sample_cov(x, y) -> float:
    x, y = _paired(x, y)
    if x.size == 0:
        raise DimensionMismatchError("covariance needs at least one value")
    return float(np.mean((x - x.mean()) * (y - y.mean())))


def pearson(x, y) -> Optional[float]:
    """Correlation with the same 1/N convention as sample_cov; None when a side is constant."""
    x, y = _paired(x, y)
    if x.size < 2:
        raise DimensionMismatchError("correlation needs at least two values")
    sigma_x = float(population_std(x))
    sigma_y = float(population_std(y))
    if sigma_x == 0 or sigma_y == 0:
        return None
    return sample_cov(x, y) / (sigma_x * sigma_y)


def correlation_matrix(features: np.ndarray, outputs: np.ndarray) -> CorrelationReport:
    features = np.asarray(features, dtype=np.float64)
    outputs = np.asarray(outputs, dtype=np.float64)
    n = features.shape[0]
    if outputs.shape[0] != n:
        raise DimensionMismatchError("features and outputs disagree in instance count")
    if n < 2:
        raise DimensionMismatchError("correlation needs at least two instances")

    centered_x = features - features.mean(axis=0)
    centered_y = outputs - outputs.mean(axis=0)
    covariance = centered_x.T @ centered_y / n
    sigma_x = population_std(features)
    sigma_y = population_std(outputs)

    defined = (sigma_x[:, None] > 0) & (sigma_y[None, :] > 0)
    scale = np.where(defined, sigma_x[:, None] * sigma_y[None, :], 1.0)
    correlation = np.clip(np.where(defined, covariance / scale, 0.0), -1.0, 1.0)
    return CorrelationReport(
        correlation=correlation,
        defined=defined,
        covariance=covariance,
        sigma_x=sigma_x,
        sigma_y=sigma_y,
        feature_names=(),
        output_labels=(),
    )


def compute_importance(ds: Dataset, indices: Optional[Sequence[int]] = None) -> CorrelationReport:
    """
    Pearson correlation of every encoded feature against every one-hot output column.

    Args:
            ds: encoded dataset
            indices: restrict to these instances (train-only scope); all when None

    Returns:
            CorrelationReport, zero-variance pairs flagged undefined and reported as 0
    """
    rows = slice(None) if indices is None else np.asarray(indices, dtype=np.intp)
    report = correlation_matrix(ds.features[rows], ds.targets[rows])
    n_undefined = int((~report.defined).sum())
    if n_undefined:
        logger.info(f"{n_undefined} feature/output pairs have zero variance; reported as 0")
    return CorrelationReport(
        correlation=report.correlation,
        defined=report.defined,
        covariance=report.covariance,
        sigma_x=report.sigma_x,
        sigma_y=report.sigma_y,
        feature_names=tuple(ds.feature_names),
        output_labels=ds.class_labels,
    )


class MeanTable:
    """
    Running mean kept as a table of per-instance contributions value_i / n.

    Entries may be vectors: contributions has shape (n, *shape) and the
    subtract-add update works element-wise on the whole row.
    """

    def __init__(self, contributions: np.ndarray, mean: np.ndarray):
        self.contributions = contributions
        self.mean = mean

    @classmethod
    def from_values(cls, values) -> "MeanTable":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 0 or values.shape[0] == 0:
            raise MeanTableError("a mean table needs at least one value")
        contributions = values / values.shape[0]
        return cls(contributions, contributions.sum(axis=0))

    @property
    def n(self) -> int:
        return self.contributions.shape[0]

    def update(self, i: int, new_value) -> "MeanTable":
        if not 0 <= i < self.n:
            raise MeanTableError(f"index {i} out of range for a table of {self.n}")
        contribution = np.asarray(new_value, dtype=np.float64) / self.n
        self.mean = self.mean - self.contributions[i] + contribution
        self.contributions[i] = contribution
        return self

    def refresh(self) -> "MeanTable":
        self.mean = self.contributions.sum(axis=0)
        return self

    def drift(self) -> float:
        return float(np.max(np.abs(self.mean - self.contributions.sum(axis=0))))


def _equal_frequency_bins(values: np.ndarray, bins: int) -> np.ndarray:
    edges = np.unique(np.quantile(values, np.linspace(0.0, 1.0, bins + 1))[1:-1])
    return np.searchsorted(edges, values, side="right")


def chi_squared_score(bin_ids: np.ndarray, labels: np.ndarray) -> float:
    """Pearson chi-squared statistic of the bin x class contingency table."""
    _, bin_codes = np.unique(bin_ids, return_inverse=True)
    _, label_codes = np.unique(labels, return_inverse=True)
    table = np.zeros((bin_codes.max() + 1, label_codes.max() + 1))
    np.add.at(table, (bin_codes, label_codes), 1.0)
    return contingency_chi_squared(table)


def contingency_chi_squared(table: np.ndarray) -> float:
    table = np.asarray(table, dtype=np.float64)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if table.shape[0] < 2 or table.shape[1] < 2:
        return 0.0
    return float(chi2_contingency(table, correction=False)[0])


def chi_squared_rank(ds: Dataset, bins: int = DEFAULT_CHI2_BINS) -> list[FeatureScore]:
    """Rank encoded features by chi-squared against the class, highest first."""
    if bins < 2:
        raise ValueError("chi-squared ranking needs at least 2 bins")
    if ds.n_outputs < 2 or len(np.unique(ds.labels)) < 2:
        raise DegenerateClassError("chi-squared ranking needs at least two classes")

    labels = ds.labels
    names = ds.feature_names
    scores = []
    for k in range(ds.n_features):
        column = ds.features[:, k]
        if np.isin(column, (0.0, 1.0)).all():
            bin_ids = column
        else:
            bin_ids = _equal_frequency_bins(column, bins)
        score = chi_squared_score(bin_ids, labels)
        scores.append(FeatureScore(index=k, name=names[k], score=score))
    return sorted(scores, key=lambda s: (-s.score, s.index))


def save_importance(
    report: CorrelationReport,
    ds: Dataset,
    path: Path | str,
    scope: ImportanceScope,
    seed: Optional[int] = None,
    train_fraction: Optional[float] = None,
) -> ImportanceFile:
    entries = [
        ImportanceEntry(
            feature=feature,
            output=output,
            value=float(report.correlation[k, o]),
            defined=bool(report.defined[k, o]),
        )
        for k, feature in enumerate(report.feature_names)
        for o, output in enumerate(report.output_labels)
    ]
    importance_file = ImportanceFile(
        dataset_fingerprint=ds.fingerprint(),
        scope=scope,
        seed=seed,
        train_fraction=train_fraction,
        feature_names=list(report.feature_names),
        output_labels=list(report.output_labels),
        entries=entries,
    )
    Path(path).write_text(importance_file.model_dump_json(indent=2), encoding="utf-8")
    return importance_file


def load_importance(path: Path | str, ds: Dataset) -> np.ndarray:
    """Read an importance file written for `ds` into a K x C matrix of target correlations."""
    try:
        importance_file = ImportanceFile.model_validate_json(
            Path(path).read_text(encoding="utf-8")
        )
    except OSError as e:
        raise ImportanceError(f"cannot read importance file {path}: {e}") from e
    except ValidationError as e:
        raise ImportanceError(f"invalid importance file {path}: {e}") from e

    if importance_file.dataset_fingerprint != ds.fingerprint():
        raise FingerprintMismatchError(
            f"importance file {path} was computed for a different dataset"
        )
    rows = {name: k for k, name in enumerate(ds.feature_names)}
    cols = {label: o for o, label in enumerate(ds.class_labels)}
    matrix = np.zeros((ds.n_features, ds.n_outputs))
    for entry in importance_file.entries:
        if entry.feature not in rows or entry.output not in cols:
            raise ImportanceError(f"unknown pair ({entry.feature!r}, {entry.output!r})")
        matrix[rows[entry.feature], cols[entry.output]] = entry.value
    return matrix
