from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """Feature/output Pearson correlations; undefined pairs carry defined=False and 0."""

    correlation: np.ndarray  # K x C
    defined: np.ndarray  # K x C, bool
    covariance: np.ndarray  # K x C
    sigma_x: np.ndarray  # K
    sigma_y: np.ndarray  # C
    feature_names: tuple[str, ...]
    output_labels: tuple[str, ...]


@dataclass(frozen=True)
class FeatureScore:
    index: int
    name: str
    score: float
