import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from qensemble.errors import ImpossibleOutcome, UsageError
from qensemble.selftest import random_op, random_state
from qensemble.statevector import (
    H, SWAP, X, Circuit, GateOp, Statevector, apply_gate, dense_oracle_apply, marginal,
    postselect, probability, run_circuit, sample, sample_indices,
)

S2 = 1 / np.sqrt(2)


def plus():
    return Statevector([S2, S2])


def test_hadamard_on_zero():
    s = apply_gate(Statevector.zero(1), H(0))
    np.testing.assert_allclose(s.amplitudes, [S2, S2], atol=1e-15)


def test_cnot_truth_table():
    # |10>: qubit1 = 1, qubit0 = 0 -> index 2
    s = apply_gate(Statevector.basis(2, 0b10), X(0, 1))
    assert np.argmax(np.abs(s.amplitudes)) == 0b11


def test_cswap_truth_table():
    s = apply_gate(Statevector.basis(3, 0b101), SWAP(0, 1, 2))
    assert np.argmax(np.abs(s.amplitudes)) == 0b110


@pytest.mark.parametrize("op", [H(3), X(3), SWAP(0, 1, 5), X(0, 1, 4)])
def test_out_of_range_is_usage_error(op):
    with pytest.raises(UsageError):
        apply_gate(Statevector.zero(3), op)


@pytest.mark.parametrize(
    "kind,targets,controls",
    [("H", (0, 1), ()), ("SWAP", (0,), ()), ("X", (0,), (0,)), ("CZ", (0,), ())],
)
def test_malformed_gates_rejected(kind, targets, controls):
    with pytest.raises(UsageError):
        GateOp(kind, targets, controls)


def test_probability_examples():
    assert probability(plus(), 0, 1) == pytest.approx(0.5, abs=1e-15)
    assert probability(Statevector.zero(1), 0, 1) == 0.0


def test_probability_matches_dense_summation(rng):
    s = random_state(3, rng)
    probs = np.abs(s.amplitudes) ** 2
    for q in range(3):
        for outcome in (0, 1):
            expected = sum(probs[b] for b in range(8) if (b >> q) & 1 == outcome)
            assert probability(s, q, outcome) == pytest.approx(expected, abs=1e-14)


def test_marginal_ordering(rng):
    s = random_state(4, rng)
    probs = np.abs(s.amplitudes) ** 2
    qubits = [2, 0, 3]
    joint = marginal(s, qubits)
    for k in range(8):
        mask = [(k >> t) & 1 for t in range(3)]
        expected = sum(p for b, p in enumerate(probs) if all((b >> q) & 1 == v for q, v in zip(qubits, mask)))
        assert joint[k] == pytest.approx(expected, abs=1e-14)


def test_postselect_examples():
    prob, col = postselect(plus(), 0, 0)
    assert prob == pytest.approx(0.5)
    np.testing.assert_allclose(col.amplitudes, [1, 0], atol=1e-15)
    bell = Statevector([S2, 0, 0, S2])
    prob, col = postselect(bell, 0, 1)
    assert prob == pytest.approx(0.5)
    np.testing.assert_allclose(col.amplitudes, [0, 0, 0, 1], atol=1e-15)


def test_postselect_impossible():
    with pytest.raises(ImpossibleOutcome):
        postselect(Statevector.zero(2), 1, 1)


def test_postselect_algebra(rng):
    s = random_state(4, rng)
    for q in range(4):
        for outcome in (0, 1):
            prob, col = postselect(s, q, outcome)
            assert prob == pytest.approx(probability(s, q, outcome), abs=1e-12)
            assert probability(col, q, outcome) == pytest.approx(1.0, abs=1e-12)
            assert col.norm() == pytest.approx(1.0, abs=1e-12)


def test_sample_examples():
    g = np.random.default_rng(0)
    assert sample(Statevector.zero(1), [0], 100, g) == {"0": 100}
    counts = sample(plus(), [0], 8192, g)
    assert abs(counts.get("1", 0) - 4096) <= 3 * np.sqrt(8192 * 0.25)
    with pytest.raises(UsageError):
        sample(plus(), [], 10, g)
    with pytest.raises(UsageError):
        sample(plus(), [0], 0, g)


def test_sample_key_order():
    # qubit 0 = 1, qubit 1 = 0; key character t belongs to qubits[t]
    s = Statevector.basis(2, 0b01)
    assert sample(s, [0, 1], 5, np.random.default_rng(0)) == {"10": 5}
    assert sample(s, [1, 0], 5, np.random.default_rng(0)) == {"01": 5}


def test_sampling_converges(rng):
    s = random_state(3, rng)
    for shots in (1_000, 100_000):
        counts = sample_indices(s, [0], shots, rng)
        p1 = probability(s, 0, 1)
        assert abs(counts[1] / shots - p1) < 5 * np.sqrt(p1 * (1 - p1) / shots)


def test_sampling_chi_square(rng):
    for _ in range(5):
        s = random_state(2, rng)
        shots = 100_000
        counts = sample_indices(s, [0, 1], shots, rng)
        expected = marginal(s, [0, 1]) * shots
        assert chisquare(counts, expected).pvalue > 0.001


def test_dense_oracle_agrees_with_kernels(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        s = random_state(n, rng)
        op = random_op(n, rng)
        ref = dense_oracle_apply(s, op)
        apply_gate(s, op)
        assert np.max(np.abs(s.amplitudes - ref.amplitudes)) < 1e-12


def test_involutions(rng):
    s = random_state(3, rng)
    t = s.copy()
    run_circuit(t, [H(1), H(1), X(0, 2), X(0, 2)])
    np.testing.assert_allclose(t.amplitudes, s.amplitudes, atol=1e-14)


def test_dense_oracle_limit():
    with pytest.raises(UsageError):
        dense_oracle_apply(Statevector.zero(11), H(0))


def test_circuit_validates_width():
    c = Circuit(2)
    c.append(H(1))
    with pytest.raises(UsageError):
        c.append(X(2))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 7), depth=st.integers(1, 20))
def test_norm_preservation(seed, n, depth):
    g = np.random.default_rng(seed)
    s = random_state(n, g)
    for _ in range(depth):
        apply_gate(s, random_op(n, g))
    assert abs(s.norm() - 1) < 1e-12
    for q in range(n):
        assert abs(probability(s, q, 0) + probability(s, q, 1) - 1) < 1e-12
