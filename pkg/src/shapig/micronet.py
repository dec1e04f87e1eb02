"""A small fully connected network with exact input gradients.

Every hidden layer is affine followed by the activation; the output layer is
affine, then optionally softmax (``head="classification"``). Gradients are
computed by a hand-written reverse pass.

Saved models are JSON documents::

    {
      "format": "shapig.micronet",
      "version": 1,
      "layer_sizes": [d_in, h1, ..., d_out],
      "activation": "tanh" | "relu",
      "head": "regression" | "classification",
      "weights": [[...row-major, shape (out, in)...], ...],
      "biases": [[...], ...]
    }

Floats are written with ``repr`` precision, so a save/load round trip is
bit-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

FORMAT_TAG = "shapig.micronet"
FORMAT_VERSION = 1
ACTIVATIONS = ("tanh", "relu")
HEADS = ("regression", "classification")


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MicroNet:
    weights: tuple
    biases: tuple
    activation: str = "tanh"
    head: str = "regression"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.head not in HEADS:
            raise ValueError(f"unknown head {self.head!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias vector per weight matrix")
        object.__setattr__(self, "weights", tuple(_frozen(W) for W in self.weights))
        object.__setattr__(self, "biases", tuple(_frozen(b) for b in self.biases))
        for j, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[0],):
                raise ValueError(f"layer {j}: bias shape {b.shape} does not match W {W.shape}")
            if j and W.shape[1] != self.weights[j - 1].shape[0]:
                raise ValueError(f"layer {j}: input width {W.shape[1]} breaks the chain")
            if not (np.isfinite(W).all() and np.isfinite(b).all()):
                raise ValueError(f"layer {j}: non-finite parameters")

    @classmethod
    def init(cls, layer_sizes: Sequence[int], seed: int, activation: str = "tanh",
             head: str = "regression") -> "MicroNet":
        """Uniform ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` initialization."""
        if len(layer_sizes) < 2 or min(layer_sizes) < 1:
            raise ValueError("layer_sizes needs input and output widths >= 1")
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(tuple(weights), tuple(biases), activation, head)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(W.shape[0] for W in self.weights)

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[1]

    @property
    def n_outputs(self) -> int:
        return self.weights[-1].shape[0]

    def scaled_output(self, c: float) -> "MicroNet":
        """Copy with the final affine layer multiplied by ``c``."""
        W = list(self.weights)
        b = list(self.biases)
        W[-1] = W[-1] * c
        b[-1] = b[-1] * c
        return MicroNet(tuple(W), tuple(b), self.activation, self.head)

    def __call__(self, x):
        return forward(self, x)


def _act(z, kind):
    return np.tanh(z) if kind == "tanh" else np.maximum(z, 0.0)


def _act_grad(z, a, kind):
    return 1.0 - a * a if kind == "tanh" else (z > 0).astype(float)


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _as_batch(net: MicroNet, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != net.n_inputs:
        raise ValueError(f"expected input width {net.n_inputs}, got shape {x.shape}")
    return X, single


def _forward_cache(weights, biases, activation, head, X: np.ndarray):
    zs, acts = [], [X]
    a = X
    last = len(weights) - 1
    for j, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W.T + b
        zs.append(z)
        a = z if j == last else _act(z, activation)
        acts.append(a)
    out = _softmax(a) if head == "classification" else a
    return zs, acts, out


def _cache(net: MicroNet, X):
    return _forward_cache(net.weights, net.biases, net.activation, net.head, X)


def forward(net: MicroNet, x) -> np.ndarray:
    """Network output for one input vector or a batch of rows."""
    X, single = _as_batch(net, x)
    out = _cache(net, X)[2]
    return out[0] if single else out


def _backward(weights, activation, zs, acts, d_out):
    """Back-propagate ``d_out`` (gradient w.r.t. the final affine output)."""
    dW, db = [None] * len(weights), [None] * len(weights)
    delta = d_out
    for j in range(len(weights) - 1, -1, -1):
        dW[j] = delta.T @ acts[j]
        db[j] = delta.sum(axis=0)
        delta = delta @ weights[j]
        if j:
            delta = delta * _act_grad(zs[j - 1], acts[j], activation)
    return delta, dW, db


def _input_backward(weights, activation, zs, acts, d_out):
    # same chain as _backward without the parameter gradients
    delta = d_out
    for j in range(len(weights) - 1, 0, -1):
        delta = (delta @ weights[j]) * _act_grad(zs[j - 1], acts[j], activation)
    return delta @ weights[0]


def input_gradient(net: MicroNet, x, output_index: int) -> np.ndarray:
    """Exact gradient of output ``output_index`` with respect to the input.

    Accepts a single vector or a batch of rows; for the classification head
    the differentiated quantity is the softmax probability of that class.
    """
    if not 0 <= output_index < net.n_outputs:
        raise ValueError(f"output_index {output_index} out of range({net.n_outputs})")
    X, single = _as_batch(net, x)
    zs, acts, out = _cache(net, X)
    seed = np.zeros_like(out)
    if net.head == "classification":
        p = out[:, output_index : output_index + 1]
        seed = -p * out
        seed[:, output_index] += p[:, 0]
    else:
        seed[:, output_index] = 1.0
    grad = _input_backward(net.weights, net.activation, zs, acts, seed)
    return grad[0] if single else grad


@dataclass(frozen=True)
class TrainConfig:
    """Mini-batch training settings.

    With ``optimizer="sgd"`` and ``batch_size >= len(dataset)`` (plain
    full-batch gradient descent) the epoch loss is non-increasing whenever
    ``learning_rate < 2 / L``, ``L`` being a Lipschitz constant of the loss
    gradient; for a single linear layer under squared error
    ``L = lambda_max(A^T A) / n`` with ``A`` the inputs augmented by a ones
    column.
    """

    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 128
    seed: int = 0
    loss: str = "squared-error"
    optimizer: str = "adam"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.loss not in ("squared-error", "cross-entropy"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def _targets(net: MicroNet, Y, loss: str) -> np.ndarray:
    Y = np.asarray(Y)
    if loss == "cross-entropy":
        if Y.ndim == 1:
            onehot = np.zeros((len(Y), net.n_outputs))
            onehot[np.arange(len(Y)), Y.astype(int)] = 1.0
            return onehot
        return Y.astype(float)
    Y = Y.astype(float)
    return Y[:, None] if Y.ndim == 1 else Y


def _loss(out, T, loss: str) -> float:
    if loss == "cross-entropy":
        return float(-np.mean(np.sum(T * np.log(np.clip(out, 1e-300, None)), axis=1)))
    return float(0.5 * np.mean(np.sum((out - T) ** 2, axis=1)))


def dataset_loss(net: MicroNet, X, Y, loss: str = "squared-error") -> float:
    """Mean loss over a dataset: 0.5 * squared error summed over outputs, or
    cross-entropy against integer labels / probability rows."""
    X = np.asarray(X, dtype=float)
    return _loss(_cache(net, X)[2], _targets(net, Y, loss), loss)


def train(net: MicroNet, X, Y, cfg: TrainConfig, history: Optional[list] = None) -> MicroNet:
    """Fit ``net`` to ``(X, Y)`` and return a new network.

    ``history``, if given, receives the full-dataset loss after every epoch.
    Squared error needs the regression head and cross-entropy the
    classification head.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("dataset must be a non-empty 2-D array of inputs")
    if X.shape[1] != net.n_inputs:
        raise ValueError(f"inputs have width {X.shape[1]}, net expects {net.n_inputs}")
    expected_head = "classification" if cfg.loss == "cross-entropy" else "regression"
    if net.head != expected_head:
        raise ValueError(f"{cfg.loss} loss needs the {expected_head} head")
    T = _targets(net, Y, cfg.loss)
    if len(T) != len(X) or T.shape[1] != net.n_outputs:
        raise ValueError("targets do not match inputs / output width")

    rng = np.random.default_rng(cfg.seed)
    Ws = [W.copy() for W in net.weights]
    bs_ = [b.copy() for b in net.biases]
    params = Ws + bs_
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    n = len(X)
    bs = min(cfg.batch_size, n)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if bs < n else np.arange(n)
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            zs, acts, out = _forward_cache(Ws, bs_, net.activation, net.head, X[idx])
            # both losses give (out - T) w.r.t. the final affine output
            d_out = (out - T[idx]) / len(idx)
            _, dW, db = _backward(Ws, net.activation, zs, acts, d_out)
            step += 1
            for p, g, mi, vi in zip(params, dW + db, m, v):
                if cfg.optimizer == "sgd":
                    p -= cfg.learning_rate * g
                else:
                    mi *= beta1
                    mi += (1 - beta1) * g
                    vi *= beta2
                    vi += (1 - beta2) * g * g
                    mhat = mi / (1 - beta1**step)
                    vhat = vi / (1 - beta2**step)
                    p -= cfg.learning_rate * mhat / (np.sqrt(vhat) + eps)
        with np.errstate(all="ignore"):
            loss = _loss(_forward_cache(Ws, bs_, net.activation, net.head, X)[2], T, cfg.loss)
        if not math.isfinite(loss):
            raise TrainingDivergedError(epoch, loss)
        if history is not None:
            history.append(loss)
    return MicroNet(tuple(Ws), tuple(bs_), net.activation, net.head)


def save(net: MicroNet, path) -> None:
    doc = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "layer_sizes": list(net.layer_sizes),
        "activation": net.activation,
        "head": net.head,
        "weights": [W.ravel().tolist() for W in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }
    Path(path).write_text(json.dumps(doc))


def load(path) -> MicroNet:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != FORMAT_TAG:
        raise ValueError(f"{path}: not a micronet file")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported micronet version {doc.get('version')}")
    sizes = doc["layer_sizes"]
    weights = [np.array(w, dtype=float).reshape(o, i)
               for w, i, o in zip(doc["weights"], sizes[:-1], sizes[1:])]
    return MicroNet(tuple(weights), tuple(doc["biases"]), doc["activation"], doc["head"])
