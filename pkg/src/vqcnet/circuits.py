"""Feature-map and RealAmplitudes circuits, and the expectation of a single VQC.

A VQC on ``d`` qubits is

    RY(x_0) ... RY(x_{d-1})                      feature map
    RY(t_0) ... RY(t_{d-1})                      rotation layer
    CX(i, j) for every i < j, lexicographic      full entanglement
    RY(t_d) ... RY(t_{2d-1})                     rotation layer

measured with the all-qubit parity observable.  ``reps > 1`` repeats the
entangle-then-rotate block and adds ``d`` parameters per repetition.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .exceptions import DimensionMismatchError, DomainError
from .simulator import (
    CX,
    RY,
    Circuit,
    apply_cx_batch,
    apply_ry_batch,
    make_rng,
    parity_expectation_batch,
    parity_expectation_exact,
    parity_expectation_sampled,
    run_circuit,
    sample_parity_batch,
    zero_states,
)

_DOMAIN_TOL = 1e-12


def num_ansatz_params(num_qubits: int, reps: int = 1) -> int:
    return (reps + 1) * num_qubits


def ansatz_layout(num_qubits: int, reps: int = 1) -> list[tuple]:
    """Gate recipe of the ansatz as ``("ry", qubit, param_index)`` / ``("cx", control, target)``."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    layout = [("ry", q, q) for q in range(num_qubits)]
    pairs = list(combinations(range(num_qubits), 2))
    for r in range(1, reps + 1):
        layout.extend(("cx", i, j) for i, j in pairs)
        layout.extend(("ry", q, r * num_qubits + q) for q in range(num_qubits))
    return layout


def check_features(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DimensionMismatchError(f"feature vector must be 1-D and nonempty, got shape {x.shape}")
    for i, v in enumerate(x):
        if not (-_DOMAIN_TOL <= v <= np.pi + _DOMAIN_TOL):
            raise DomainError(f"feature {i} = {v!r} lies outside [0, pi]")
    return x


def _check_params(num_qubits: int, theta, reps: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    expected = num_ansatz_params(num_qubits, reps)
    if theta.shape != (expected,):
        raise DimensionMismatchError(
            f"{num_qubits}-qubit ansatz with {reps} repetition(s) takes {expected} parameters, "
            f"got shape {theta.shape}"
        )
    return theta


def build_feature_map(x) -> Circuit:
    x = check_features(x)
    return Circuit(x.size, tuple(RY(i, float(v)) for i, v in enumerate(x)))


def build_ansatz(num_qubits: int, theta, reps: int = 1) -> Circuit:
    theta = _check_params(num_qubits, theta, reps)
    gates = []
    for kind, a, b in ansatz_layout(num_qubits, reps):
        gates.append(RY(a, float(theta[b])) if kind == "ry" else CX(a, b))
    return Circuit(num_qubits, tuple(gates))


def build_vqc(x, theta, reps: int = 1) -> Circuit:
    fmap = build_feature_map(x)
    return fmap + build_ansatz(fmap.num_qubits, theta, reps)


def vqc_expectation(x, theta, *, reps: int = 1, shots: int | None = None, seed=None) -> float:
    """Parity expectation f(x, theta) of one VQC.

    Exact by default; pass ``shots`` (and optionally ``seed``) for a
    shot-sampled estimate.
    """
    x = check_features(x)
    state = run_circuit(build_vqc(x, theta, reps))
    if shots is None:
        return parity_expectation_exact(state)
    return parity_expectation_sampled(state, shots, seed)


def evaluate_batch(
    features: np.ndarray,
    params: np.ndarray,
    *,
    reps: int = 1,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Row-wise VQC expectations for ``features`` (B, d) and ``params`` (B, P).

    Either argument may also be a single row, which is broadcast.  Feature
    angles are not range-checked here: gradient code shifts them past
    ``[0, pi]`` on purpose.
    """
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    params = np.atleast_2d(np.asarray(params, dtype=np.float64))
    batch = max(features.shape[0], params.shape[0])
    features = np.broadcast_to(features, (batch, features.shape[1]))
    params = np.broadcast_to(params, (batch, params.shape[1]))
    d = features.shape[1]
    if params.shape[1] != num_ansatz_params(d, reps):
        raise DimensionMismatchError(
            f"{d}-qubit ansatz takes {num_ansatz_params(d, reps)} parameters, got {params.shape[1]}"
        )

    # RY and CX are real matrices, so real amplitudes are exact here.
    states = zero_states(batch, d, dtype=np.float64)
    for q in range(d):
        states = apply_ry_batch(states, q, features[:, q])
    for kind, a, b in ansatz_layout(d, reps):
        if kind == "ry":
            states = apply_ry_batch(states, a, params[:, b])
        else:
            states = apply_cx_batch(states, a, b)

    if shots is None:
        return parity_expectation_batch(states)
    if rng is None:
        rng = make_rng(None)
    return sample_parity_batch(states, shots, rng)
