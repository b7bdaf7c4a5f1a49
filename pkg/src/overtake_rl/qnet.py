"""Feedforward action-value network with in-repo reverse-mode gradients.

The network is a plain MLP (softplus hidden units, linear outputs) trained
with stochastic gradient descent on the squared TD error. Keeping the
arithmetic explicit keeps gradients exactly checkable against central
finite differences. Parameters serialize to a text format (`qnet v1`)
that round-trips float64 losslessly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["QNetwork", "softplus", "sigmoid"]


def softplus(z: np.ndarray) -> np.ndarray:
    """Smooth ramp log(1 + exp(z)), numerically stable."""
    return np.logaddexp(0.0, z)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class QNetwork:
    """MLP mapping an observation vector to one value per action."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or not weights:
            raise ValueError("mismatched parameter lists")
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        for w, b in zip(self.weights, self.biases):
            if w.shape[0] != b.shape[0]:
                raise ValueError("bias shape does not match weight rows")

    # -- construction -----------------------------------------------------

    @classmethod
    def initialized(cls, dims: list[int], rng: np.random.Generator) -> "QNetwork":
        """Glorot-uniform weights, zero biases, for layer sizes ``dims``."""
        if len(dims) < 2:
            raise ValueError("need at least input and output dimensions")
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "QNetwork":
        return QNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def load_from(self, other: "QNetwork") -> None:
        """Overwrite parameters with a snapshot of ``other`` (target sync)."""
        self.weights = [w.copy() for w in other.weights]
        self.biases = [b.copy() for b in other.biases]

    def params_equal(self, other: "QNetwork") -> bool:
        return all(
            np.array_equal(a, b)
            for a, b in zip(self.weights + self.biases, other.weights + other.biases)
        )

    # -- inference ---------------------------------------------------------

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(
                f"observation dimension {x.shape[-1]} does not match network input {self.input_dim}"
            )
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = softplus(h @ w.T + b)
        return h @ self.weights[-1].T + self.biases[-1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ValueError("forward expects a single observation vector")
        return self.forward_batch(x[None, :])[0]

    # -- training ----------------------------------------------------------

    def loss_and_grads(self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray):
        """Mean squared TD error over the batch and its parameter gradients.

        Only the value of the taken action contributes per sample; targets
        are treated as constants.
        """
        x = np.asarray(x, dtype=float)
        actions = np.asarray(actions, dtype=int)
        targets = np.asarray(targets, dtype=float)
        n = x.shape[0]

        pre, post = [], [x]
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = h @ w.T + b
            h = softplus(z)
            pre.append(z)
            post.append(h)
        q = h @ self.weights[-1].T + self.biases[-1]

        rows = np.arange(n)
        err = q[rows, actions] - targets
        loss = float(np.mean(err**2))

        dq = np.zeros_like(q)
        dq[rows, actions] = 2.0 * err / n
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        grads_w[-1] = dq.T @ post[-1]
        grads_b[-1] = dq.sum(axis=0)
        dh = dq @ self.weights[-1]
        for i in range(len(self.weights) - 2, -1, -1):
            dz = dh * sigmoid(pre[i])
            grads_w[i] = dz.T @ post[i]
            grads_b[i] = dz.sum(axis=0)
            dh = dz @ self.weights[i]
        return loss, (grads_w, grads_b)

    def sgd_step(self, grads, learning_rate: float) -> None:
        grads_w, grads_b = grads
        for w, g in zip(self.weights, grads_w):
            w -= learning_rate * g
        for b, g in zip(self.biases, grads_b):
            b -= learning_rate * g

    # -- serialization -----------------------------------------------------

    def save(self, path) -> None:
        lines = ["qnet v1", " ".join(str(d) for d in self.dims)]
        flat = []
        for w, b in zip(self.weights, self.biases):
            flat.extend(f"{v:.17g}" for v in w.ravel())
            flat.extend(f"{v:.17g}" for v in b.ravel())
        lines.append(" ".join(flat))
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "QNetwork":
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip()
            if header != "qnet v1":
                raise ValueError(f"unrecognized model header {header!r}")
            dims = [int(tok) for tok in fh.readline().split()]
            values = np.array([float(tok) for tok in fh.read().split()])
        expected = sum((i + 1) * o for i, o in zip(dims[:-1], dims[1:]))
        if values.size != expected:
            raise ValueError(
                f"model file holds {values.size} parameters, layer dims need {expected}"
            )
        weights, biases, pos = [], [], 0
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            weights.append(values[pos : pos + fan_in * fan_out].reshape(fan_out, fan_in))
            pos += fan_in * fan_out
            biases.append(values[pos : pos + fan_out].copy())
            pos += fan_out
        return cls(weights, biases)
