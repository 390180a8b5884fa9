"""Quick randomized invariant checks, runnable without pytest."""
from __future__ import annotations

import numpy as np

from .classifiers import analytic_oracle, run_classifier
from .encoding import KINDS, Dataset, encode_training_set, unit_normalize
from .ensemble import (
    EnsembleConfig,
    branch_outputs,
    build_selection_program,
    combine_branches,
    kept_masks,
    run_test_mode,
    selection_success_probability,
)
from .statevector import GateOp, Statevector, apply_gate, dense_oracle_apply


def random_state(n: int, rng) -> Statevector:
    return Statevector(rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n), normalize=True)


def random_op(n: int, rng) -> GateOp:
    kind = rng.choice(["H", "X", "SWAP"])
    k = 2 if kind == "SWAP" else 1
    qubits = rng.permutation(n)
    ncontrols = rng.integers(0, n - k + 1)
    return GateOp(str(kind), tuple(qubits[:k]), tuple(qubits[k : k + ncontrols]))


def random_problem(rng, n_max=8, m_range=(2, 4)):
    N = int(rng.integers(1, n_max + 1))
    M = int(rng.integers(m_range[0], m_range[1] + 1))
    X = rng.normal(size=(N, M))
    y = rng.choice([-1, 1], size=N)
    return encode_training_set(Dataset(X, y)), unit_normalize(rng.normal(size=M))


def check_gates(trials: int, rng) -> float:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        state = random_state(n, rng)
        ref = state.copy()
        for _ in range(int(rng.integers(1, 6))):
            op = random_op(n, rng)
            apply_gate(state, op)
            ref = dense_oracle_apply(ref, op)
        worst = max(worst, float(np.max(np.abs(state.amplitudes - ref.amplitudes))))
    return worst


def check_classifiers(trials: int, rng) -> float:
    worst = 0.0
    for t in range(trials):
        kind = KINDS[t % 3]
        enc, x = random_problem(rng)
        a = run_classifier(kind, enc, x)
        b = analytic_oracle(kind, enc.vectors, enc.labels, x)
        worst = max(worst, abs(a.raw - b.raw))
    return worst


def check_selection() -> float:
    worst = 0.0
    for d in (1, 2, 3):
        for n in (2, 3):
            for m in (2, 3):
                masks = kept_masks(build_selection_program(n, m, d))
                worst = max(worst, float(np.max(np.abs(masks.mean(axis=(1, 2)) - 0.75))))
                X = np.ones((1 << n, 1 << m))
                enc = encode_training_set(Dataset(X, np.ones(1 << n, dtype=int)))
                x = unit_normalize(np.ones(1 << m))
                p = selection_success_probability(EnsembleConfig(d=d), enc, x)
                worst = max(worst, abs(p - 0.75))
    return worst


def check_ensemble(trials: int, rng) -> float:
    worst = 0.0
    for t in range(trials):
        kind = KINDS[t % 3]
        enc, x = random_problem(rng, n_max=8)
        if enc.n == 0:
            continue
        d = int(rng.integers(0, 4))
        w = rng.random(1 << d)
        w /= w.sum()
        e = run_test_mode(EnsembleConfig(d=d, kind=kind), w, enc, x)
        br = branch_outputs(build_selection_program(enc.n, enc.m, d, kind), enc, x)
        worst = max(worst, abs(e - combine_branches(w, br.mass, br.prob_zero)))
    return worst


def run_selftest(seed: int = 0, echo=print) -> bool:
    rng = np.random.default_rng(seed)
    checks = [
        ("gate kernels vs dense matrices", lambda: check_gates(200, rng), 1e-10),
        ("classifier circuits vs closed forms", lambda: check_classifiers(60, rng), 1e-9),
        ("selection keeps 3/4 / p0 = 0.75", check_selection, 1e-9),
        ("ensemble vs per-branch combination", lambda: check_ensemble(30, rng), 1e-9),
    ]
    ok = True
    for name, fn, tol in checks:
        err = fn()
        passed = err < tol
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}: max error {err:.2e} (tol {tol:.0e})")
    return ok
