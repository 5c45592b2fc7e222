"""Dense statevector simulation for circuits made of RY and CX gates.

Qubit ``i`` is bit ``i`` of the basis-state index (bit 0 is the least
significant), so ``|q_{d-1} ... q_1 q_0>`` lives at index ``sum(q_i << i)``.

Two layers are provided:

* a small object API (:class:`StateVector`, :class:`RY`, :class:`CX`,
  :class:`Circuit`, :func:`apply_gate`, :func:`run_circuit`) that validates
  everything and never mutates its inputs, and
* batched kernels (:func:`apply_ry_batch`, :func:`apply_cx_batch`,
  :func:`parity_expectation_batch`, :func:`sample_parity_batch`) that act on a
  ``(batch, 2**d)`` amplitude array with one rotation angle per row.  The
  model and training code run on these; they skip validation.

Randomness comes from :func:`make_rng`, which wraps numpy's PCG64 bit
generator.  Seeds are plain integers or :class:`numpy.random.SeedSequence`
objects, so independent streams are obtained with ``SeedSequence.spawn``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .exceptions import InvalidGateError

SeedLike = Union[int, np.random.SeedSequence, None]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """PCG64 generator; identical seeds give identical streams on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class RY:
    target: int
    angle: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,)


@dataclass(frozen=True)
class CX:
    control: int
    target: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.control, self.target)


Gate = Union[RY, CX]


def _check_gate(gate: Gate, num_qubits: int) -> None:
    if not isinstance(gate, (RY, CX)):
        raise InvalidGateError(f"unsupported gate {gate!r}")
    for q in gate.qubits:
        if not (0 <= q < num_qubits):
            raise InvalidGateError(f"qubit index {q} out of range for {num_qubits} qubits")
    if isinstance(gate, CX) and gate.control == gate.target:
        raise InvalidGateError(f"CX control and target are both {gate.control}")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise InvalidGateError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            _check_gate(gate, self.num_qubits)

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise InvalidGateError("cannot concatenate circuits of different widths")
        return Circuit(self.num_qubits, self.gates + other.gates)


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.num_qubits < 1 or amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))


# -- batched kernels -------------------------------------------------------


def zero_states(batch: int, num_qubits: int, dtype=np.complex128) -> np.ndarray:
    states = np.zeros((batch, 2**num_qubits), dtype=dtype)
    states[:, 0] = 1.0
    return states


def apply_ry_batch(states: np.ndarray, qubit: int, angles) -> np.ndarray:
    """Rotate ``qubit`` of every row of ``states`` by its own angle.

    ``angles`` is a scalar or a length-``batch`` array.  Returns a new array.
    """
    batch, dim = states.shape
    low = 1 << qubit
    view = states.reshape(batch, dim // (2 * low), 2, low)
    half = 0.5 * np.broadcast_to(np.asarray(angles, dtype=np.float64), (batch,))
    c = np.cos(half)[:, None, None]
    s = np.sin(half)[:, None, None]
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    out = np.empty_like(view)
    out[:, :, 0, :] = c * a0 - s * a1
    out[:, :, 1, :] = s * a0 + c * a1
    return out.reshape(batch, dim)


def apply_cx_batch(states: np.ndarray, control: int, target: int) -> np.ndarray:
    """Flip ``target`` on every basis state whose ``control`` bit is set."""
    dim = states.shape[1]
    idx = np.arange(dim)
    perm = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
    return states[:, perm]


def parity_signs(num_qubits: int) -> np.ndarray:
    """Eigenvalues of Z x Z x ... x Z on the computational basis: (-1)**popcount(k)."""
    idx = np.arange(2**num_qubits)
    pop = np.zeros_like(idx)
    for q in range(num_qubits):
        pop += (idx >> q) & 1
    return np.where(pop % 2 == 0, 1.0, -1.0)


def parity_expectation_batch(states: np.ndarray) -> np.ndarray:
    num_qubits = states.shape[1].bit_length() - 1
    probs = np.abs(states) ** 2
    return np.clip(probs @ parity_signs(num_qubits), -1.0, 1.0)


def sample_parity_batch(states: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Shot-based parity estimate for each row.

    Each row draws ``shots`` basis states from ``|amp|**2`` (aggregated as a
    multinomial count vector) and averages their parity eigenvalues.
    """
    if shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots}")
    num_qubits = states.shape[1].bit_length() - 1
    probs = np.abs(states) ** 2
    probs /= probs.sum(axis=1, keepdims=True)
    counts = rng.multinomial(shots, probs)
    return counts @ parity_signs(num_qubits) / shots


# -- object API ------------------------------------------------------------


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check_gate(gate, state.num_qubits)
    amps = state.amplitudes[None, :]
    if isinstance(gate, RY):
        out = apply_ry_batch(amps, gate.target, gate.angle)
    else:
        out = apply_cx_batch(amps, gate.control, gate.target)
    return StateVector(state.num_qubits, out[0])


def run_circuit(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Apply the gates of ``circuit`` in order, starting from ``|0...0>`` by default."""
    state = StateVector.zero(circuit.num_qubits) if initial is None else initial
    if state.num_qubits != circuit.num_qubits:
        raise InvalidGateError(
            f"circuit acts on {circuit.num_qubits} qubits but the state has {state.num_qubits}"
        )
    for gate in circuit.gates:
        state = apply_gate(state, gate)
    return state


def parity_expectation_exact(state: StateVector) -> float:
    """<psi| Z^{(x)d} |psi> = sum_k (-1)**popcount(k) |a_k|**2."""
    return float(parity_expectation_batch(state.amplitudes[None, :])[0])


def parity_expectation_sampled(state: StateVector, shots: int, rng_seed: SeedLike) -> float:
    """Average parity over ``shots`` measurements of ``state``; deterministic in ``rng_seed``."""
    if not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    rng = make_rng(rng_seed)
    probs = state.probabilities()
    outcomes = rng.choice(probs.size, size=int(shots), p=probs / probs.sum())
    return float(np.mean(parity_signs(state.num_qubits)[outcomes]))

