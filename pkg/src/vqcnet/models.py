"""VQC classifier and hybrid quantum-classical network.

Both models map a feature matrix ``X`` (N, d) with entries in ``[0, pi]`` to
an output ``f`` in ``[-1, 1]`` and turn it into a class probability with
``P(y | x) = (y * f + 1) / 2``.  Training minimises the mean negative
log-likelihood of the labels.

Gradients of circuit outputs come from the two-term parameter-shift rule
with shift ``pi / 2``.  For the hybrid network the hidden-layer gradient is
assembled by backpropagation; the derivative of the output circuit with
respect to one of its inputs is itself a parameter shift, since every input
enters the circuit as an RY angle.

Gradient order is hidden circuit 0, hidden circuit 1, ..., output circuit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuits import check_features, evaluate_batch, num_ansatz_params
from .exceptions import DimensionMismatchError, DomainError

SHIFT = np.pi / 2
PROB_EPS = 1e-12
HIDDEN_SCALE = np.pi / 2


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X[None, :] if X.ndim == 1 else X


def _shift_rows(base: np.ndarray, shift: float = SHIFT) -> np.ndarray:
    """Stack ``base + s e_k`` for every k, then ``base - s e_k`` for every k: shape (2P, P)."""
    eye = np.eye(base.size) * shift
    return np.concatenate([base + eye, base - eye])


def _shifted_derivatives(features: np.ndarray, params: np.ndarray, *, reps, shots, rng) -> np.ndarray:
    """d f / d params for every row of ``features`` and a single parameter vector: (N, P)."""
    n, p = features.shape[0], params.size
    shifted = _shift_rows(params)
    f = evaluate_batch(
        np.repeat(features, 2 * p, axis=0),
        np.tile(shifted, (n, 1)),
        reps=reps,
        shots=shots,
        rng=rng,
    ).reshape(n, 2, p)
    return 0.5 * (f[:, 0, :] - f[:, 1, :])


def _input_derivatives(features: np.ndarray, params: np.ndarray, *, reps, shots, rng) -> np.ndarray:
    """d f / d features with parameters fixed: (N, d)."""
    n, d = features.shape
    eye = np.eye(d) * SHIFT
    shifted = (features[:, None, None, :] + np.stack([eye, -eye])[None]).reshape(n * 2 * d, d)
    f = evaluate_batch(shifted, params, reps=reps, shots=shots, rng=rng).reshape(n, 2, d)
    return 0.5 * (f[:, 0, :] - f[:, 1, :])


def _cost_weights(f: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d Cost / d f_i for the mean clamped NLL."""
    probs = np.maximum((y * f + 1.0) / 2.0, PROB_EPS)
    return -y / (2.0 * probs) / y.size


@dataclass(frozen=True, eq=False)
class VqcClassifier:
    input_dim: int
    params: np.ndarray
    reps: int = 1

    model_type = "vqc"

    def __post_init__(self):
        params = np.array(self.params, dtype=np.float64)
        if params.shape != (num_ansatz_params(self.input_dim, self.reps),):
            raise DimensionMismatchError(
                f"VQC on {self.input_dim} qubits needs {num_ansatz_params(self.input_dim, self.reps)} "
                f"parameters, got shape {params.shape}"
            )
        params.setflags(write=False)
        object.__setattr__(self, "params", params)

    @classmethod
    def param_count(cls, input_dim: int, reps: int = 1) -> int:
        return num_ansatz_params(input_dim, reps)

    @property
    def num_params(self) -> int:
        return self.params.size

    def with_params(self, params) -> "VqcClassifier":
        return VqcClassifier(self.input_dim, params, self.reps)

    def output(self, X, *, shots=None, rng=None) -> np.ndarray:
        return evaluate_batch(_as_matrix(X), self.params, reps=self.reps, shots=shots, rng=rng)

    def gradient(self, X, y, *, shots=None, rng=None) -> np.ndarray:
        X = _as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        f = self.output(X, shots=shots, rng=rng)
        df = _shifted_derivatives(X, self.params, reps=self.reps, shots=shots, rng=rng)
        return _cost_weights(f, y) @ df

    def to_dict(self) -> dict:
        doc = {"model_type": self.model_type, "input_dim": self.input_dim,
               "parameters": self.params.tolist()}
        if self.reps != 1:
            doc["reps"] = self.reps
        return doc


@dataclass(frozen=True, eq=False)
class HybridNetwork:
    """``hidden_count`` VQCs over the input feeding one VQC over ``hidden_count`` qubits."""

    input_dim: int
    hidden_count: int
    hidden_params: np.ndarray
    output_params: np.ndarray
    reps: int = 1

    model_type = "hnn"

    def __post_init__(self):
        hidden = np.array(self.hidden_params, dtype=np.float64)
        out = np.array(self.output_params, dtype=np.float64)
        p1 = num_ansatz_params(self.input_dim, self.reps)
        p2 = num_ansatz_params(self.hidden_count, self.reps)
        if hidden.shape != (self.hidden_count, p1):
            raise DimensionMismatchError(f"hidden parameters must have shape {(self.hidden_count, p1)}, got {hidden.shape}")
        if out.shape != (p2,):
            raise DimensionMismatchError(f"output parameters must have shape {(p2,)}, got {out.shape}")
        hidden.setflags(write=False)
        out.setflags(write=False)
        object.__setattr__(self, "hidden_params", hidden)
        object.__setattr__(self, "output_params", out)

    @classmethod
    def param_count(cls, input_dim: int, hidden_count: int = 2, reps: int = 1) -> int:
        return hidden_count * num_ansatz_params(input_dim, reps) + num_ansatz_params(hidden_count, reps)

    @classmethod
    def from_flat(cls, input_dim: int, hidden_count: int, flat, reps: int = 1) -> "HybridNetwork":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (cls.param_count(input_dim, hidden_count, reps),):
            raise DimensionMismatchError(
                f"expected {cls.param_count(input_dim, hidden_count, reps)} parameters, got shape {flat.shape}"
            )
        split = hidden_count * num_ansatz_params(input_dim, reps)
        return cls(input_dim, hidden_count, flat[:split].reshape(hidden_count, -1), flat[split:], reps)

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([self.hidden_params.ravel(), self.output_params])

    @property
    def num_params(self) -> int:
        return self.hidden_params.size + self.output_params.size

    def with_params(self, params) -> "HybridNetwork":
        return HybridNetwork.from_flat(self.input_dim, self.hidden_count, params, self.reps)

    def forward(self, X, *, shots=None, rng=None):
        """Return ``(h_prime, h, z)`` for every row of ``X``.

        ``h_prime`` (N, m) are hidden expectations, ``h = pi/2 (h_prime + 1)``
        the rescaled inputs to the output circuit and ``z`` (N,) its output.
        """
        X = _as_matrix(X)
        n, m = X.shape[0], self.hidden_count
        h_prime = evaluate_batch(
            np.tile(X, (m, 1)), np.repeat(self.hidden_params, n, axis=0),
            reps=self.reps, shots=shots, rng=rng,
        ).reshape(m, n).T
        h = rescale_hidden(h_prime)
        z = evaluate_batch(h, self.output_params, reps=self.reps, shots=shots, rng=rng)
        return h_prime, h, z

    def output(self, X, *, shots=None, rng=None) -> np.ndarray:
        return self.forward(X, shots=shots, rng=rng)[2]

    def gradient(self, X, y, *, shots=None, rng=None) -> np.ndarray:
        X = _as_matrix(X)
        y = np.asarray(y, dtype=np.float64)
        kw = dict(reps=self.reps, shots=shots, rng=rng)
        _, h, z = self.forward(X, shots=shots, rng=rng)
        dcost_dz = _cost_weights(z, y)

        dz_dout = _shifted_derivatives(h, self.output_params, **kw)
        dz_dh = _input_derivatives(h, self.output_params, **kw)

        grad_hidden = np.empty_like(self.hidden_params)
        for j in range(self.hidden_count):
            dhj = _shifted_derivatives(X, self.hidden_params[j], **kw)
            upstream = dcost_dz * dz_dh[:, j] * HIDDEN_SCALE
            grad_hidden[j] = upstream @ dhj
        return np.concatenate([grad_hidden.ravel(), dcost_dz @ dz_dout])

    def to_dict(self) -> dict:
        doc = {"model_type": self.model_type, "input_dim": self.input_dim,
               "hidden_count": self.hidden_count, "parameters": self.params.tolist()}
        if self.reps != 1:
            doc["reps"] = self.reps
        return doc


def rescale_hidden(h_prime):
    """Map hidden expectations from [-1, 1] onto feature angles in [0, pi]."""
    return HIDDEN_SCALE * (np.asarray(h_prime, dtype=np.float64) + 1.0)


def _check_label(y) -> int:
    if y not in (-1, 1):
        raise DomainError(f"label must be -1 or +1, got {y!r}")
    return int(y)


def predict_proba(model, x, y) -> float:
    """P(y | x) for a single point."""
    y = _check_label(y)
    f = float(model.output(check_features(x))[0])
    return (y * f + 1.0) / 2.0


def predict_label(model, x) -> int:
    """+1 when the model output is >= 0, else -1."""
    return 1 if float(model.output(check_features(x))[0]) >= 0.0 else -1


def labels_from_output(f) -> np.ndarray:
    return np.where(np.asarray(f) >= 0.0, 1, -1)


def forward_hnn(net: HybridNetwork, x):
    """Single-point forward pass returning ``(h_prime, h, z)``."""
    h_prime, h, z = net.forward(check_features(x))
    return h_prime[0], h[0], float(z[0])


def cost_from_output(f, y) -> float:
    """Mean negative log-likelihood (natural log) with P clamped to [1e-12, 1]."""
    f = np.asarray(f, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if f.size == 0:
        raise ValueError("cost of an empty dataset is undefined")
    probs = np.clip((y * f + 1.0) / 2.0, PROB_EPS, 1.0)
    return float(-np.mean(np.log(probs)))


def nll_cost(model, dataset) -> float:
    if len(dataset) == 0:
        raise ValueError("cost of an empty dataset is undefined")
    return cost_from_output(model.output(dataset.features), dataset.labels)


def param_shift_derivative(evaluate, theta: float, shift: float = SHIFT) -> float:
    """Two-term parameter-shift derivative of ``evaluate`` at ``theta``."""
    return (evaluate(theta + shift) - evaluate(theta - shift)) / 2.0


def grad_vqc(clf: VqcClassifier, batch, *, shots=None, rng=None) -> np.ndarray:
    if len(batch) == 0:
        raise ValueError("gradient over an empty batch is undefined")
    return clf.gradient(batch.features, batch.labels, shots=shots, rng=rng)


def grad_hnn(net: HybridNetwork, batch, *, shots=None, rng=None) -> np.ndarray:
    if len(batch) == 0:
        raise ValueError("gradient over an empty batch is undefined")
    return net.gradient(batch.features, batch.labels, shots=shots, rng=rng)


# -- serialization ---------------------------------------------------------


def model_from_dict(doc: dict):
    try:
        kind = doc["model_type"]
        d = int(doc["input_dim"])
        params = np.asarray(doc["parameters"], dtype=np.float64)
        reps = int(doc.get("reps", 1))
        if kind == "vqc":
            return VqcClassifier(d, params, reps)
        if kind == "hnn":
            return HybridNetwork.from_flat(d, int(doc["hidden_count"]), params, reps)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model document: {exc}") from exc
    raise ValueError(f"unknown model_type {kind!r}")


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
