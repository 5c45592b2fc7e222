import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import vqc_f, vqc_state
from vqcnet.circuits import build_ansatz, build_feature_map, build_vqc, evaluate_batch, vqc_expectation
from vqcnet.exceptions import DimensionMismatchError, DomainError
from vqcnet.simulator import CX, RY, run_circuit

angles = st.floats(-10.0, 10.0, allow_nan=False)
features = st.floats(0.0, np.pi, allow_nan=False)


def test_feature_map_zero_input():
    state = run_circuit(build_feature_map([0.0, 0.0, 0.0]))
    np.testing.assert_allclose(state.amplitudes, np.eye(8)[0])


def test_feature_map_pi_input():
    np.testing.assert_allclose(run_circuit(build_feature_map([np.pi])).amplitudes, [0, 1], atol=1e-15)


def test_feature_map_half_pi_uniform():
    state = run_circuit(build_feature_map([np.pi / 2, np.pi / 2]))
    np.testing.assert_allclose(state.amplitudes, [0.5, 0.5, 0.5, 0.5], atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(features, min_size=1, max_size=4))
def test_feature_map_zero_probability(x):
    probs = run_circuit(build_feature_map(x)).probabilities()
    idx = np.arange(probs.size)
    for i, v in enumerate(x):
        p0 = probs[((idx >> i) & 1) == 0].sum()
        assert abs(p0 - np.cos(v / 2) ** 2) < 1e-12


@pytest.mark.parametrize("bad, index", [([0.1, -0.2], 1), ([3.2, 0.0], 0)])
def test_feature_map_domain_error_names_index(bad, index):
    with pytest.raises(DomainError, match=f"feature {index}"):
        build_feature_map(bad)


def test_ansatz_single_qubit_has_no_cx():
    assert build_ansatz(1, [0.4, -0.2]).gates == (RY(0, 0.4), RY(0, -0.2))


def test_ansatz_two_qubit_gate_order():
    expected = (RY(0, 0.0), RY(1, 0.0), CX(0, 1), RY(0, 0.0), RY(1, 0.0))
    assert build_ansatz(2, [0, 0, 0, 0]).gates == expected


def test_ansatz_three_qubit_entanglers():
    cx = [g for g in build_ansatz(3, np.zeros(6)).gates if isinstance(g, CX)]
    assert cx == [CX(0, 1), CX(0, 2), CX(1, 2)]


def test_ansatz_parameter_placement():
    gates = build_ansatz(3, [1, 2, 3, 4, 5, 6]).gates
    ry = [(g.target, g.angle) for g in gates if isinstance(g, RY)]
    assert ry == [(0, 1), (1, 2), (2, 3), (0, 4), (1, 5), (2, 6)]


def test_ansatz_wrong_length():
    with pytest.raises(DimensionMismatchError):
        build_ansatz(2, [0.1, 0.2, 0.3])


def test_ansatz_extra_repetitions():
    circuit = build_ansatz(2, np.arange(6.0), reps=2)
    assert sum(isinstance(g, CX) for g in circuit.gates) == 2
    assert [g.angle for g in circuit.gates if isinstance(g, RY)] == [0, 1, 2, 3, 4, 5]


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_gate_count_identity(d):
    circuit = build_vqc(np.full(d, 0.5), np.zeros(2 * d))
    assert len(circuit) == d + 2 * d + d * (d - 1) // 2
    assert sum(isinstance(g, CX) for g in circuit.gates) == d * (d - 1) // 2


def test_expectation_trivial_values():
    assert vqc_expectation([0.0], [0.0, 0.0]) == pytest.approx(1.0, abs=1e-15)
    assert vqc_expectation([np.pi / 2], [0.0, 0.0]) == pytest.approx(0.0, abs=1e-15)


def test_expectation_two_qubit_frozen():
    # dense Kronecker-product oracle value, see tests/oracles.py
    value = vqc_expectation([np.pi / 4, np.pi / 3], [0.3, -0.7, 1.1, 0.2])
    assert value == pytest.approx(0.5603253820198948, abs=1e-9)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_expectation_matches_dense_oracle(d):
    rng = np.random.default_rng(d)
    for _ in range(10):
        x = rng.uniform(0, np.pi, d)
        theta = rng.uniform(-np.pi, np.pi, 2 * d)
        state = run_circuit(build_vqc(x, theta))
        np.testing.assert_allclose(state.amplitudes, vqc_state(x, theta), atol=1e-9)
        assert vqc_expectation(x, theta) == pytest.approx(vqc_f(x, theta), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(features, angles, angles)
def test_single_qubit_closed_form(x, a, b):
    assert vqc_expectation([x], [a, b]) == pytest.approx(np.cos(x + a + b), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.data())
def test_output_bound_and_periodicity(d, data):
    x = np.array(data.draw(st.lists(features, min_size=d, max_size=d)))
    theta = np.array(data.draw(st.lists(angles, min_size=2 * d, max_size=2 * d)))
    k = data.draw(st.integers(0, 2 * d - 1))
    f = vqc_expectation(x, theta)
    assert -1.0 <= f <= 1.0
    shifted = theta.copy()
    shifted[k] += 2 * np.pi
    assert vqc_expectation(x, shifted) == pytest.approx(f, abs=1e-10)


def test_batch_evaluator_agrees_with_object_path():
    rng = np.random.default_rng(7)
    X = rng.uniform(0, np.pi, (6, 3))
    thetas = rng.uniform(-np.pi, np.pi, (6, 6))
    batch = evaluate_batch(X, thetas)
    single = [vqc_expectation(x, t) for x, t in zip(X, thetas)]
    np.testing.assert_allclose(batch, single, atol=1e-12)


def test_sampled_expectation_is_seeded():
    a = vqc_expectation([1.0, 2.0], [0.1, 0.2, 0.3, 0.4], shots=1024, seed=11)
    b = vqc_expectation([1.0, 2.0], [0.1, 0.2, 0.3, 0.4], shots=1024, seed=11)
    exact = vqc_expectation([1.0, 2.0], [0.1, 0.2, 0.3, 0.4])
    assert a == b
    assert abs(a - exact) < 4 / np.sqrt(1024)
