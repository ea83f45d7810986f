from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class Network:
    """
    Logistic feed-forward net. weights[l][i, j] connects unit i of layer l
    to unit j of layer l + 1; biases[l] belongs to layer l + 1.
    """

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        self.layer_sizes = tuple(int(size) for size in self.layer_sizes)
        pairs = list(zip(self.layer_sizes[:-1], self.layer_sizes[1:]))
        if len(self.weights) != len(pairs) or len(self.biases) != len(pairs):
            raise ValueError("one weight matrix and bias vector is required per layer pair")
        for (n_in, n_out), weight, bias in zip(pairs, self.weights, self.biases):
            if weight.shape != (n_in, n_out) or bias.shape != (n_out,):
                raise ValueError(
                    f"expected shapes {(n_in, n_out)} and {(n_out,)}, "
                    f"found {weight.shape} and {bias.shape}"
                )
            if not (np.isfinite(weight).all() and np.isfinite(bias).all()):
                raise ValueError("weights and biases must be finite")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> "Network":
        return Network(
            layer_sizes=self.layer_sizes,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def same_weights(self, other: "Network") -> bool:
        """Exact (bit-level) equality of every parameter."""
        return self.layer_sizes == other.layer_sizes and all(
            np.array_equal(a, b)
            for a, b in zip([*self.weights, *self.biases], [*other.weights, *other.biases])
        )


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """Every layer's activation vector; activations[0] is the input."""

    activations: tuple[np.ndarray, ...]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]

    @property
    def last_hidden(self) -> np.ndarray:
        return self.activations[-2]
