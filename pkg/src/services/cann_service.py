"""
Correlation-aided training: the blended objective E = p * E_D + (1 - p) * E_c.

E_c = 1/2 sum_{k,o} (c_ko - cov(y_o, X_k))^2 compares the network's
output/feature covariances over the train set with the targets
c = sigma_y * sigma_x * I. The covariances need set-level means of the
outputs, which change after every weight update; they are kept in
MeanTables refreshed with the subtract-add rule as each instance is
visited.
"""

from typing import Optional, Sequence

import numpy as np

from src.core.exceptions import (
    DimensionMismatchError,
    FingerprintMismatchError,
    ImportanceError,
)
from src.core.logger import logger
from src.models.cann import CannDeltas, ImportanceSpec, ObjectiveValue
from src.models.dataset import Dataset, Split
from src.models.network import ForwardTrace, Network
from src.schemas.training import TrainConfig
from src.services.network_service import (
    EpochCallback,
    backprop_step,
    check_compatible,
    forward,
    forward_batch,
    output_error_deltas,
    shuffle_rng,
)
from src.services.stats_service import MeanTable, population_std


def check_blend(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"blend weight p={p} is outside [0, 1]")


def matched_config(cfg: TrainConfig, p: float) -> TrainConfig:
    """cfg with alpha / p, so the data part of a cann step equals a plain step under cfg."""
    check_blend(p)
    if p == 0:
        raise ValueError("p=0 has no data step to match")
    return cfg.model_copy(update={"learning_rate": cfg.learning_rate / p})


def importance_from_arrays(
    features: np.ndarray,
    targets: np.ndarray,
    importance: np.ndarray,
    dataset_fingerprint: str = "",
    train_indices: Sequence[int] = (),
) -> ImportanceSpec:
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    importance = np.asarray(importance, dtype=np.float64)
    if importance.shape != (features.shape[1], targets.shape[1]):
        raise DimensionMismatchError(
            f"importance must be {features.shape[1]} x {targets.shape[1]}, "
            f"got {importance.shape}"
        )
    if np.any(np.abs(importance) > 1.0):
        raise ImportanceError("target correlations must lie in [-1, 1]")

    sigma_x = population_std(features)
    sigma_y = population_std(targets)
    return ImportanceSpec(
        importance=importance,
        c=sigma_y[None, :] * sigma_x[:, None] * importance,
        sigma_x=sigma_x,
        sigma_y=sigma_y,
        xbar=features.mean(axis=0),
        dataset_fingerprint=dataset_fingerprint,
        train_indices=tuple(int(i) for i in train_indices),
    )


def build_importance(ds: Dataset, importance, train_indices: Sequence[int]) -> ImportanceSpec:
    """Freeze sigma_x, sigma_y and x-bar over the train portion and derive c."""
    rows = np.asarray(train_indices, dtype=np.intp)
    importance = np.asarray(importance, dtype=np.float64)
    if np.any(importance < 0):
        logger.info("Negative target correlations supplied; kept as given")
    return importance_from_arrays(
        ds.features[rows], ds.targets[rows], importance, ds.fingerprint(), train_indices
    )


def exact_covariances(features: np.ndarray, outputs: np.ndarray, xbar: np.ndarray) -> np.ndarray:
    """cov(y_o, X_k) = mean(x_k y_o) - xbar_k * ybar_o, recomputed from scratch."""
    return features.T @ outputs / len(features) - np.outer(xbar, outputs.mean(axis=0))


def correlation_error(spec: ImportanceSpec, covariances: np.ndarray) -> float:
    return float(0.5 * np.sum((spec.c - covariances) ** 2))


class CannState:
    """
    Memoized means over the train set: y-bar per output, mean(x_k y_o),
    mean(x_k h_j) and h-bar per last-hidden unit. Owned by one trainer.
    """

    def __init__(self, features: np.ndarray, p: float):
        check_blend(p)
        self.features = features
        self.p = p
        self.y_table: MeanTable
        self.xy_table: MeanTable
        self.xh_table: MeanTable
        self.h_table: MeanTable

    @classmethod
    def initialize(cls, net: Network, features: np.ndarray, p: float) -> "CannState":
        state = cls(np.asarray(features, dtype=np.float64), p)
        state.resync(net)
        return state

    @property
    def n(self) -> int:
        return self.y_table.n

    @property
    def n_entries(self) -> int:
        tables = (self.y_table, self.xy_table, self.xh_table, self.h_table)
        return sum(table.contributions.size for table in tables)

    def resync(self, net: Network) -> "CannState":
        """Recompute every row from the current network; means are exact sums afterwards."""
        activations = forward_batch(net, self.features)
        hidden, outputs = activations[-2], activations[-1]
        self.y_table = MeanTable.from_values(outputs)
        self.xy_table = MeanTable.from_values(self.features[:, :, None] * outputs[:, None, :])
        self.xh_table = MeanTable.from_values(self.features[:, :, None] * hidden[:, None, :])
        self.h_table = MeanTable.from_values(hidden)
        return self

    def record(self, i: int, hidden: np.ndarray, output: np.ndarray) -> "CannState":
        x = self.features[i]
        self.y_table.update(i, output)
        self.xy_table.update(i, np.outer(x, output))
        self.xh_table.update(i, np.outer(x, hidden))
        self.h_table.update(i, hidden)
        return self

    def refresh(self) -> "CannState":
        for table in (self.y_table, self.xy_table, self.xh_table, self.h_table):
            table.refresh()
        return self

    def covariances(self, xbar: np.ndarray) -> np.ndarray:
        """K x C: mean(x_k y_o) - xbar_k * ybar_o from the tables."""
        return self.xy_table.mean - np.outer(xbar, self.y_table.mean)

    def hidden_covariances(self, xbar: np.ndarray) -> np.ndarray:
        """K x H: mean(x_k h_j) - xbar_k * hbar_j from the tables."""
        return self.xh_table.mean - np.outer(xbar, self.h_table.mean)

    def correlation_error(self, spec: ImportanceSpec) -> float:
        return correlation_error(spec, self.covariances(spec.xbar))


def cann_output_deltas(
    trace: ForwardTrace,
    target: np.ndarray,
    x: np.ndarray,
    state: CannState,
    spec: ImportanceSpec,
) -> CannDeltas:
    """
    Output-layer terms of the blended rule for one instance.

    Last-layer weight w_jo moves along
        y_o(1 - y_o) [p (t_o - y_o) h_j + (1 - p) sum_k r_ko (mean(x_k h_j) - xbar_k hbar_j)]
    with r = c - cov from the tables. The delta handed to lower layers is
        y_o(1 - y_o) [p (t_o - y_o) + (1 - p) sum_k r_ko (x_k - xbar_k)],
    which only approximates the table term: its train-set average matches it when
    y_o(1 - y_o) is the same on every instance.
    The output bias only gets the data part: its correlation term is identically 0.
    """
    p = state.p
    check_blend(p)
    output = trace.output
    slope = output * (1.0 - output)
    data_delta = p * output_error_deltas(output, target)
    residual = spec.c - state.covariances(spec.xbar)
    instance_error = (x - spec.xbar) @ residual
    weight_correction = state.hidden_covariances(spec.xbar).T @ residual
    q = 1.0 - p
    return CannDeltas(
        deltas=data_delta + q * slope * instance_error,
        output_weight_step=np.outer(trace.last_hidden, data_delta) + q * slope * weight_correction,
        output_bias_step=data_delta,
    )


def composite_objective(
    net: Network, features: np.ndarray, targets: np.ndarray, spec: ImportanceSpec, p: float
) -> ObjectiveValue:
    """E_D, E_c and E = p E_D + (1 - p) E_c over a set, with exact means."""
    check_blend(p)
    outputs = forward_batch(net, features)[-1]
    data_error = float(0.5 * np.sum((targets - outputs) ** 2))
    corr_error = correlation_error(spec, exact_covariances(features, outputs, spec.xbar))
    return ObjectiveValue(
        data_error=data_error,
        correlation_error=corr_error,
        blended=p * data_error + (1.0 - p) * corr_error,
    )


def composite_gradient(
    net: Network, features: np.ndarray, targets: np.ndarray, spec: ImportanceSpec, p: float
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """
    Exact full-batch gradient of E = p E_D + (1 - p) E_c.

    Returns:
            (weight gradients, bias gradients), one array per layer pair
    """
    check_blend(p)
    features = np.asarray(features, dtype=np.float64)
    activations = forward_batch(net, features)
    outputs = activations[-1]
    residual = spec.c - exact_covariances(features, outputs, spec.xbar)
    instance_error = (features - spec.xbar) @ residual / len(features)

    # negative gradient with respect to each unit's net input
    delta = outputs * (1.0 - outputs) * (p * (targets - outputs) + (1.0 - p) * instance_error)
    n_pairs = len(net.weights)
    weight_grads: list[np.ndarray] = [np.empty(0)] * n_pairs
    bias_grads: list[np.ndarray] = [np.empty(0)] * n_pairs
    for layer in range(n_pairs - 1, -1, -1):
        weight_grads[layer] = -(activations[layer].T @ delta)
        bias_grads[layer] = -delta.sum(axis=0)
        if layer > 0:
            h = activations[layer]
            delta = h * (1.0 - h) * (delta @ net.weights[layer].T)
    return weight_grads, bias_grads


def train_cann(
    net: Network,
    ds: Dataset,
    split: Split,
    spec: ImportanceSpec,
    cfg: TrainConfig,
    p: float,
    on_epoch_end: Optional[EpochCallback] = None,
    resync: bool = True,
) -> Network:
    """
    Stochastic descent on the blended objective.

    Tables are populated from a full forward pass before the first epoch;
    each visited instance updates its table rows with the activations it
    was just trained on. At every epoch end the tables are resynced from the
    current network (or only refreshed when `resync` is False).
    """
    check_blend(p)
    check_compatible(net, ds)
    if spec.dataset_fingerprint != ds.fingerprint():
        raise FingerprintMismatchError("importance spec was built for a different dataset")
    if spec.train_indices != tuple(split.train_indices):
        raise FingerprintMismatchError("importance spec was built over a different train split")

    net = net.copy()
    rows = np.asarray(split.train_indices, dtype=np.intp)
    features, targets = ds.features[rows], ds.targets[rows]
    state = CannState.initialize(net, features, p)
    rng = shuffle_rng(cfg.seed)

    logger.info(
        f"Training cann network {list(net.layer_sizes)} for {cfg.epochs} epochs "
        f"on {len(rows)} instances, p={p}"
    )
    for epoch in range(1, cfg.epochs + 1):
        for i in rng.permutation(len(rows)):
            trace = forward(net, features[i])
            step = cann_output_deltas(trace, targets[i], features[i], state, spec)
            backprop_step(
                net,
                trace,
                step.deltas,
                cfg.learning_rate,
                output_weight_step=step.output_weight_step,
                output_bias_step=step.output_bias_step,
            )
            state.record(int(i), trace.last_hidden, trace.output)
        if resync:
            state.resync(net)
        else:
            state.refresh()
        if on_epoch_end is not None:
            on_epoch_end(epoch, net, state)
    return net
