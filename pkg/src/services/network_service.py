"""Logistic multilayer perceptron: init, forward pass, delta propagation and plain training."""

from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.special import expit

from src.core.exceptions import CannError, DimensionMismatchError, NetworkShapeError
from src.core.logger import logger
from src.models.dataset import Dataset, Split
from src.models.network import ForwardTrace, Network
from src.schemas.network import NetworkFile
from src.schemas.training import Method, TrainConfig

INIT_STREAM = 1
SHUFFLE_STREAM = 2

# (epoch, network, cann state or None)
EpochCallback = Callable[[int, Network, Optional[object]], None]


def init(layer_sizes: Sequence[int], seed: int, init_range: float) -> Network:
    """Weights and biases drawn i.i.d. from U[-init_range, init_range]."""
    if len(layer_sizes) < 3:
        raise NetworkShapeError("a network needs an input, an output and at least one hidden layer")
    if any(size < 1 for size in layer_sizes):
        raise NetworkShapeError(f"every layer needs at least one unit, got {list(layer_sizes)}")
    if init_range < 0:
        raise NetworkShapeError("init_range must be non-negative")

    rng = np.random.default_rng([seed, INIT_STREAM])
    weights, biases = [], []
    for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        weights.append(rng.uniform(-init_range, init_range, size=(n_in, n_out)))
        biases.append(rng.uniform(-init_range, init_range, size=n_out))
    return Network(layer_sizes=tuple(layer_sizes), weights=weights, biases=biases)


def forward(net: Network, x) -> ForwardTrace:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.n_inputs,):
        raise DimensionMismatchError(f"expected {net.n_inputs} inputs, got shape {x.shape}")
    activations = [x]
    for weight, bias in zip(net.weights, net.biases):
        activations.append(expit(activations[-1] @ weight + bias))
    return ForwardTrace(activations=tuple(activations))


def forward_batch(net: Network, features: np.ndarray) -> list[np.ndarray]:
    """Activation matrices of every layer for a batch of instances (rows)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != net.n_inputs:
        raise DimensionMismatchError(
            f"expected an (n, {net.n_inputs}) batch, got shape {features.shape}"
        )
    activations = [features]
    for weight, bias in zip(net.weights, net.biases):
        activations.append(expit(activations[-1] @ weight + bias))
    return activations


def output_error_deltas(output: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Plain backprop output delta (t - y) y (1 - y)."""
    return (target - output) * output * (1.0 - output)


def backprop_step(
    net: Network,
    trace: ForwardTrace,
    output_deltas,
    alpha: float,
    output_weight_step: Optional[np.ndarray] = None,
    output_bias_step: Optional[np.ndarray] = None,
) -> Network:
    """
    Propagate output deltas down and add alpha * delta * upstream activation to every weight.

    The network is updated in place and returned. Hidden deltas are
    h(1 - h) * sum_p delta_p w_jp, computed from the weights before the update.
    `output_weight_step` / `output_bias_step` replace the last layer's
    outer(h, delta) / delta terms when the caller's objective has a
    correction that is not of that form.
    """
    n_pairs = len(net.weights)
    top = np.asarray(output_deltas, dtype=np.float64)
    if top.shape != (net.n_outputs,):
        raise DimensionMismatchError(f"expected {net.n_outputs} output deltas, got {top.shape}")
    if len(trace.activations) != n_pairs + 1:
        raise DimensionMismatchError("trace was not produced by this network")

    deltas: list[np.ndarray] = [top] * n_pairs
    for layer in range(n_pairs - 1, 0, -1):
        h = trace.activations[layer]
        deltas[layer - 1] = h * (1.0 - h) * (net.weights[layer] @ deltas[layer])

    for layer in range(n_pairs):
        last = layer == n_pairs - 1
        if last and output_weight_step is not None:
            weight_step = output_weight_step
        else:
            weight_step = np.outer(trace.activations[layer], deltas[layer])
        bias_step = output_bias_step if last and output_bias_step is not None else deltas[layer]
        net.weights[layer] += alpha * weight_step
        net.biases[layer] += alpha * bias_step
    return net


def predict(net: Network, x) -> int:
    """Argmax of the output activations; ties go to the lowest index."""
    return int(np.argmax(forward(net, x).output))


def predict_batch(net: Network, features: np.ndarray) -> np.ndarray:
    return np.argmax(forward_batch(net, features)[-1], axis=1)


def accuracy(net: Network, features: np.ndarray, targets: np.ndarray) -> float:
    """Percent of instances whose argmax output matches the one-hot target."""
    if len(features) == 0:
        raise DimensionMismatchError("accuracy of an empty set")
    hits = predict_batch(net, features) == np.argmax(targets, axis=1)
    return float(hits.mean() * 100.0)


def squared_error(net: Network, features: np.ndarray, targets: np.ndarray) -> float:
    """E_D = 1/2 sum over instances and outputs of (t - y)^2."""
    outputs = forward_batch(net, features)[-1]
    return float(0.5 * np.sum((targets - outputs) ** 2))


def shuffle_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([seed, SHUFFLE_STREAM])


def check_compatible(net: Network, ds: Dataset) -> None:
    if net.n_inputs != ds.n_features or net.n_outputs != ds.n_outputs:
        raise DimensionMismatchError(
            f"network {net.layer_sizes} does not fit {ds.n_features} features "
            f"and {ds.n_outputs} outputs"
        )


def train_plain(
    net: Network,
    ds: Dataset,
    split: Split,
    cfg: TrainConfig,
    on_epoch_end: Optional[EpochCallback] = None,
) -> Network:
    """Stochastic gradient descent on E_D with a fresh seeded visiting order per epoch."""
    check_compatible(net, ds)
    net = net.copy()
    rows = np.asarray(split.train_indices, dtype=np.intp)
    features, targets = ds.features[rows], ds.targets[rows]
    rng = shuffle_rng(cfg.seed)

    logger.info(
        f"Training plain network {list(net.layer_sizes)} for {cfg.epochs} epochs "
        f"on {len(rows)} instances"
    )
    for epoch in range(1, cfg.epochs + 1):
        for i in rng.permutation(len(rows)):
            trace = forward(net, features[i])
            deltas = output_error_deltas(trace.output, targets[i])
            backprop_step(net, trace, deltas, cfg.learning_rate)
        if on_epoch_end is not None:
            on_epoch_end(epoch, net, None)
    return net


def save_network(
    net: Network,
    path: Path | str,
    cfg: TrainConfig,
    method: Method,
    dataset_fingerprint: str,
    p: Optional[float] = None,
) -> NetworkFile:
    network_file = NetworkFile(
        layer_sizes=list(net.layer_sizes),
        weights=[w.tolist() for w in net.weights],
        biases=[b.tolist() for b in net.biases],
        config=cfg,
        method=method,
        p=p,
        dataset_fingerprint=dataset_fingerprint,
    )
    Path(path).write_text(network_file.model_dump_json(indent=2), encoding="utf-8")
    return network_file


def load_network(path: Path | str) -> Network:
    try:
        network_file = NetworkFile.model_validate_json(Path(path).read_text(encoding="utf-8"))
        return Network(
            layer_sizes=tuple(network_file.layer_sizes),
            weights=[np.asarray(w, dtype=np.float64) for w in network_file.weights],
            biases=[np.asarray(b, dtype=np.float64) for b in network_file.biases],
        )
    except OSError as e:
        raise CannError(f"cannot read network {path}: {e}") from e
    except (ValidationError, ValueError) as e:
        raise NetworkShapeError(f"invalid network file {path}: {e}") from e
