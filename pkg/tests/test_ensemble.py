import numpy as np
import pytest

from qensemble.classifiers import analytic_oracle
from qensemble.encoding import Dataset, encode_training_set, unit_normalize
from qensemble.ensemble import (
    EnsembleConfig, branch_outputs, build_selection_program, classical_selection_oracle, combine_branches,
    feature_permutation, kept_masks, run_test_mode, run_train_mode, selection_success_probability,
)
from qensemble.errors import NonNormalizedWeights, UsageError
from qensemble.selftest import random_problem
from qensemble.trainer import ensemble_output


def problem(rng, N=6, M=3):
    X = rng.normal(size=(N, M))
    y = np.array([1, -1] * (N // 2))
    return encode_training_set(Dataset(X, y)), unit_normalize(rng.normal(size=M))


def test_program_single_control():
    prog = build_selection_program(2, 2, 1)
    assert [g.kind for g in prog.gates] == ["CSWAP", "CSWAP", "CNOT", "CNOT", "CCX"]
    assert prog.gates[0].targets == (("index", 0), ("index", 1))


def test_program_no_control():
    prog = build_selection_program(2, 2, 0)
    assert [g.kind for g in prog.gates] == ["CCX"]
    assert prog.gates[0].controls == (("index", 0), ("feature", 0))


def test_program_pairwise_loop():
    prog = build_selection_program(4, 4, 2)
    first = 2 * 4  # two CSWAPs and two CNOTs per control qubit
    second = prog.gates[first:-1]
    assert len(second) == 4 and all(g.kind == "CSWAP" for g in second)
    assert second[0].controls == (("control", 0),)
    assert second[0].targets == (("index", 0), ("index", 1))


def test_program_skips_out_of_range():
    prog = build_selection_program(1, 3, 3)
    for g in prog.gates:
        for reg, k in g.targets:
            assert k < {"index": 1, "feature": 3, "ancilla": 1}[reg]


def test_program_mirrors_test_register():
    prog = build_selection_program(2, 2, 1, "swap")
    feature = [g for g in prog.gates if g.targets[0].register == "feature"]
    test = [g for g in prog.gates if g.targets[0].register == "test"]
    assert len(feature) == len(test) == 2


def test_selection_oracle_examples():
    prog = build_selection_program(2, 2, 1)
    assert classical_selection_oracle(prog, 0, 2, 3) == (2, 3, True)
    assert classical_selection_oracle(prog, 0, 1, 1) == (1, 1, False)
    assert classical_selection_oracle(prog, 1, 0, 0)[0] == 1  # swap is a no-op on 00, X flips bit 0
    assert classical_selection_oracle(prog, 1, 1, 0)[0] == 3  # 01 -> 10 -> 11
    with pytest.raises(UsageError):
        classical_selection_oracle(prog, 2, 0, 0)


@pytest.mark.parametrize("n,m,d", [(1, 1, 1), (2, 2, 1), (2, 3, 2), (3, 2, 3), (2, 2, 4)])
def test_branches_are_bijections_keeping_three_quarters(n, m, d):
    prog = build_selection_program(n, m, d)
    masks = kept_masks(prog)
    for c in range(1 << d):
        images = {classical_selection_oracle(prog, c, i, j)[:2] for i in range(1 << n) for j in range(1 << m)}
        assert len(images) == 1 << (n + m)
        assert masks[c].mean() == 0.75


def test_uniform_data_selection_rate():
    enc = encode_training_set(Dataset(np.ones((4, 4)), np.array([1, -1, 1, -1])))
    x = unit_normalize(np.ones(4))
    for kind in ("distance", "cosine", "swap"):
        for d in (0, 1, 2):
            p = selection_success_probability(EnsembleConfig(d, kind), enc, x)
            assert p == pytest.approx(0.75, abs=1e-12)


def test_concentrated_data_always_survives():
    enc = encode_training_set(Dataset(np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([1, -1])))
    x = np.array([1.0, 0.0])
    w = np.array([1.0, 0.0, 0.0, 0.0])
    assert selection_success_probability(EnsembleConfig(2), enc, x, w) == pytest.approx(1.0)


def test_selection_rate_matches_oracle(rng):
    enc, x = problem(rng)
    cfg = EnsembleConfig(2)
    prog = build_selection_program(enc.n, enc.m, 2)
    res = branch_outputs(prog, enc, x)
    # distance success is folded into mass; divide it back out to get the selection rate
    raw_mass = np.array([m / o.success if o else 0.0 for m, o in zip(res.mass, res.outputs)])
    assert selection_success_probability(cfg, enc, x) == pytest.approx(raw_mass.mean(), abs=1e-12)


def test_d0_reduces_to_filtered_classifier(rng):
    enc, x = problem(rng)
    prog = build_selection_program(enc.n, enc.m, 0)
    mask = kept_masks(prog)[0, : enc.N, : enc.M]
    expected = analytic_oracle("distance", enc.vectors * mask, enc.labels, x[None] * mask).prob_zero
    assert run_test_mode(EnsembleConfig(0), [1.0], enc, x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("kind", ["distance", "cosine", "swap"])
def test_one_hot_weights_select_one_branch(kind, rng):
    enc, x = problem(rng)
    prog = build_selection_program(enc.n, enc.m, 2, kind)
    res = branch_outputs(prog, enc, x)
    for c in range(4):
        w = np.eye(4)[c]
        if res.outputs[c] is None:
            continue
        assert run_test_mode(EnsembleConfig(2, kind), w, enc, x) == pytest.approx(res.prob_zero[c], abs=1e-10)


@pytest.mark.parametrize("kind", ["distance", "cosine", "swap"])
def test_train_and_test_modes_agree(kind, rng):
    for _ in range(5):
        enc, x = random_problem(rng)
        cfg = EnsembleConfig(2, kind)
        tr = run_train_mode(cfg, enc, x)
        np.testing.assert_allclose(tr.p.sum(axis=1), 1.0, atol=1e-12)
        w = rng.dirichlet(np.ones(4))
        expected = ensemble_output(w, tr.p[0], tr.p0[0])
        assert run_test_mode(cfg, w, enc, x) == pytest.approx(expected, abs=1e-10)
        prog = build_selection_program(enc.n, enc.m, 2, kind)
        res = branch_outputs(prog, enc, x)
        assert combine_branches(w, res.mass, res.prob_zero) == pytest.approx(expected, abs=1e-10)
        np.testing.assert_allclose(tr.p[0], res.mass / res.mass.sum(), atol=1e-10)


def test_sampled_train_mode_statistics(rng):
    enc, x = problem(rng)
    exact = run_train_mode(EnsembleConfig(1), enc, x)
    est = run_train_mode(EnsembleConfig(1, mode="sampled", shots=40000, seed=5), enc, x)
    assert est.k0.sum() + est.k1.sum() + est.failed.sum() == 40000
    expected_p = exact.p * exact.success[:, None]
    sigma = np.sqrt(expected_p * (1 - expected_p) / 40000)
    assert np.all(np.abs(est.p - expected_p) <= 5 * sigma + 1e-12)
    assert est.success[0] == pytest.approx(exact.success[0], abs=5 * np.sqrt(0.25 / 40000))


def test_sampled_train_mode_is_deterministic(rng):
    enc, x = problem(rng)
    cfg = EnsembleConfig(1, mode="sampled", shots=500, seed=9)
    a, b = run_train_mode(cfg, enc, x), run_train_mode(cfg, enc, x)
    np.testing.assert_array_equal(a.k0, b.k0)


def test_sampled_test_mode(rng):
    enc, x = problem(rng)
    w = np.array([0.3, 0.7])
    exact = run_test_mode(EnsembleConfig(1), w, enc, x)
    est = run_test_mode(EnsembleConfig(1, mode="sampled", shots=40000), w, enc, x, np.random.default_rng(1))
    assert est == pytest.approx(exact, abs=0.015)


def test_swap_test_register_follows_feature_register():
    prog = build_selection_program(2, 2, 2, "swap")
    for c in range(4):
        np.testing.assert_array_equal(feature_permutation(prog, c, "feature"), feature_permutation(prog, c, "test"))
        assert sorted(feature_permutation(prog, c)) == [0, 1, 2, 3]


def test_weights_must_be_normalized(rng):
    enc, x = problem(rng)
    with pytest.raises(NonNormalizedWeights):
        run_test_mode(EnsembleConfig(1), [0.5, 0.6], enc, x)
    with pytest.raises(NonNormalizedWeights):
        run_test_mode(EnsembleConfig(1), [1.5, -0.5], enc, x)
    with pytest.raises(UsageError):
        run_test_mode(EnsembleConfig(1), [1.0], enc, x)


def test_config_validation():
    with pytest.raises(UsageError):
        EnsembleConfig(-1)
    with pytest.raises(UsageError):
        EnsembleConfig(1, mode="fast")
    with pytest.raises(UsageError):
        EnsembleConfig(1, kind="knn")
