from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ImportanceSpec:
    """Target correlations I and the covariance targets c = sigma_y * sigma_x * I."""

    importance: np.ndarray  # K x C
    c: np.ndarray  # K x C
    sigma_x: np.ndarray  # K, over the train portion
    sigma_y: np.ndarray  # C, of the train targets
    xbar: np.ndarray  # K
    dataset_fingerprint: str = ""
    train_indices: tuple[int, ...] = ()

    @property
    def n_features(self) -> int:
        return self.c.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.c.shape[1]


@dataclass(frozen=True, eq=False)
class CannDeltas:
    deltas: np.ndarray  # C, propagated to lower layers
    output_weight_step: np.ndarray  # H_N x C
    output_bias_step: np.ndarray  # C


@dataclass(frozen=True)
class ObjectiveValue:
    data_error: float
    correlation_error: float
    blended: float
