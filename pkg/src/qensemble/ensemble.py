"""Weighted quantum ensemble over a control register.

Each control basis state ``c`` selects a permuted ~3/4 subset of the
(training point, feature) grid. At test time the control amplitudes are
``sqrt(w_c)``; at train time they are uniform and the control register is
read out alongside the classifier's output bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .classifiers import ClassifierOutput, analytic_oracle, classifier_ops, output_distribution
from .encoding import ClassifierLayout, EncodedTrainingSet, check_kind, initial_amplitudes
from .errors import ImpossibleOutcome, NonNormalizedWeights, UsageError
from .statevector import EPS_POSTSELECT, SWAP, X, GateOp, Statevector, marginal, postselect, probability, run_circuit, sample_indices

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class EnsembleConfig:
    d: int
    kind: str = "distance"
    mode: str = "exact"
    shots: int = 8192
    accept_outcome: int = 0
    seed: int = 0

    def __post_init__(self):
        check_kind(self.kind)
        if self.d < 0:
            raise UsageError("d must be >= 0")
        if self.mode not in ("exact", "sampled"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise UsageError("shots must be >= 1 in sampled mode")
        if self.accept_outcome not in (0, 1):
            raise UsageError("accept_outcome must be 0 or 1")


# --------------------------------------------------------------------------
# data selection program
# --------------------------------------------------------------------------

class Qubit(NamedTuple):
    register: str  # control | index | feature | test | ancilla
    k: int


@dataclass(frozen=True)
class SelectionGate:
    kind: str  # CSWAP | CNOT | CCX
    controls: tuple[Qubit, ...]
    targets: tuple[Qubit, ...]


@dataclass(frozen=True)
class SelectionProgram:
    n: int
    m: int
    d: int
    kind: str
    gates: tuple[SelectionGate, ...]

    @property
    def permutation(self) -> tuple[SelectionGate, ...]:
        """Everything before the final CCX."""
        return self.gates[:-1]


def build_selection_program(n: int, m: int, d: int, kind: str = "distance") -> SelectionProgram:
    """Controlled permutation of index/feature registers followed by the marking CCX.

    Pairwise swaps in the second loop that would address a qubit beyond
    the register size (d > n or d > m) are skipped.
    """
    check_kind(kind)
    if n < 1 or m < 1:
        raise UsageError(f"selection needs n >= 1 and m >= 1 (got n={n}, m={m})")
    mirror = kind == "swap"
    gates: list[SelectionGate] = []

    def cswap(ctrl, reg, a, b):
        gates.append(SelectionGate("CSWAP", (Qubit("control", ctrl),), (Qubit(reg, a), Qubit(reg, b))))
        if mirror and reg == "feature":
            gates.append(SelectionGate("CSWAP", (Qubit("control", ctrl),), (Qubit("test", a), Qubit("test", b))))

    def cnot(ctrl, reg, a):
        gates.append(SelectionGate("CNOT", (Qubit("control", ctrl),), (Qubit(reg, a),)))
        if mirror and reg == "feature":
            gates.append(SelectionGate("CNOT", (Qubit("control", ctrl),), (Qubit("test", a),)))

    half_n, half_m = n // 2, m // 2
    for idx in range(d):
        if idx < half_n:
            cswap(idx, "index", idx, idx + half_n)
        if idx < half_m:
            cswap(idx, "feature", idx, idx + half_m)
        if idx < n:
            cnot(idx, "index", idx)
        if idx < m:
            cnot(idx, "feature", idx)
    for idx in range(d):
        for idx1 in range(d):
            if idx == idx1:
                continue
            if idx < n and idx1 < n:
                cswap(idx, "index", idx, idx1)
            if idx < m and idx1 < m:
                cswap(idx, "feature", idx, idx1)
    gates.append(SelectionGate("CCX", (Qubit("index", 0), Qubit("feature", 0)), (Qubit("ancilla", 0),)))
    return SelectionProgram(n, m, d, kind, tuple(gates))


def _permute(program: SelectionProgram, c, i, j, t=None):
    """Push integer register values through the permutation gates (vectorised)."""
    regs = {"control": np.asarray(c), "index": np.asarray(i), "feature": np.asarray(j)}
    regs["test"] = np.asarray(j if t is None else t)
    for g in program.permutation:
        (creg, ck), = g.controls
        fire = (regs[creg] >> ck) & 1
        if g.kind == "CNOT":
            (reg, k), = g.targets
            regs[reg] = regs[reg] ^ (fire << k)
        else:
            (reg, a), (_, b) = g.targets
            v = regs[reg]
            diff = ((v >> a) ^ (v >> b)) & 1 & fire
            regs[reg] = v ^ ((diff << a) | (diff << b))
    return regs["index"], regs["feature"], regs["test"]


def _kept(program_accept: int, i2, j2):
    marked = (i2 & 1) & (j2 & 1)
    return marked == program_accept


def classical_selection_oracle(program: SelectionProgram, c: int, i: int, j: int, accept_outcome: int = 0):
    """Image of (i, j) under branch ``c`` and whether the selection keeps it."""
    if not 0 <= c < (1 << program.d):
        raise UsageError(f"control value {c} out of range for d={program.d}")
    i2, j2, _ = _permute(program, c, i, j)
    return int(i2), int(j2), bool(_kept(accept_outcome, i2, j2))


def kept_masks(program: SelectionProgram, accept_outcome: int = 0) -> np.ndarray:
    """Boolean array [c, i, j]: original (i, j) survives selection in branch c."""
    c, i, j = np.meshgrid(
        np.arange(1 << program.d), np.arange(1 << program.n), np.arange(1 << program.m), indexing="ij"
    )
    i2, j2, _ = _permute(program, c, i, j)
    return _kept(accept_outcome, i2, j2)


def feature_permutation(program: SelectionProgram, c: int, register: str = "feature") -> np.ndarray:
    """perm[j] = image of feature (or test) basis state j in branch c."""
    j = np.arange(1 << program.m)
    _, jf, jt = _permute(program, np.full_like(j, c), np.zeros_like(j), j, j)
    return jf if register == "feature" else jt


# --------------------------------------------------------------------------
# circuit layout
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleLayout:
    classifier: ClassifierLayout
    selection: int
    control: tuple[int, ...]

    @classmethod
    def build(cls, kind: str, n: int, m: int, d: int) -> "EnsembleLayout":
        cl = ClassifierLayout.build(kind, n, m)
        sel = cl.num_qubits
        return cls(cl, sel, tuple(range(sel + 1, sel + 1 + d)))

    @property
    def num_qubits(self) -> int:
        return self.selection + 1 + len(self.control)

    def qubit(self, q: Qubit) -> int:
        if q.register == "control":
            return self.control[q.k]
        if q.register == "ancilla":
            return self.selection
        return getattr(self.classifier, q.register)[q.k]


def selection_ops(program: SelectionProgram, layout: EnsembleLayout) -> list[GateOp]:
    ops = []
    for g in program.gates:
        ctrls = [layout.qubit(q) for q in g.controls]
        tgts = [layout.qubit(q) for q in g.targets]
        if g.kind == "CSWAP":
            ops.append(SWAP(tgts[0], tgts[1], *ctrls))
        else:
            ops.append(X(tgts[0], *ctrls))
    return ops


def _check_weights(w, d: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != 1 << d:
        raise UsageError(f"{w.shape[0]} weights for {1 << d} branches")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise NonNormalizedWeights("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise NonNormalizedWeights(f"weights sum to {w.sum():.12g}, expected 1")
    return w


def _prepared_state(cfg: EnsembleConfig, enc: EncodedTrainingSet, x, control_amps: np.ndarray):
    program = build_selection_program(enc.n, enc.m, cfg.d, cfg.kind)
    layout = EnsembleLayout.build(cfg.kind, enc.n, enc.m, cfg.d)
    amps = np.kron(control_amps, np.kron(np.array([1.0, 0.0]), initial_amplitudes(cfg.kind, enc, x)))
    state = Statevector(amps)
    run_circuit(state, selection_ops(program, layout))
    return state, layout


def _uniform(d: int) -> np.ndarray:
    return np.full(1 << d, 1.0 / np.sqrt(1 << d))


def selection_success_probability(cfg: EnsembleConfig, enc: EncodedTrainingSet, x, w=None) -> float:
    """P(selection ancilla = accept_outcome); uniform control register unless ``w`` is given."""
    amps = _uniform(cfg.d) if w is None else np.sqrt(_check_weights(w, cfg.d))
    state, layout = _prepared_state(cfg, enc, x, amps)
    return probability(state, layout.selection, cfg.accept_outcome)


def _sample_outputs(state, layout: EnsembleLayout, accept: int, shots: int, rng):
    """Per-branch (k0, k1) counts from ``shots`` executions, plus the number of
    shots whose selection ancilla was accepted. Failed shots are dropped."""
    cl = layout.classifier
    outs, posts = list(cl.output_qubits), list(cl.postselect_zero)
    qubits = outs + posts + [layout.selection] + list(layout.control)
    counts = sample_indices(state, qubits, shots, rng)
    k, p, d = len(outs), len(posts), len(layout.control)
    # axes (C order): control, selection, classifier post-selection, outputs
    counts = counts.reshape(1 << d, 2, 1 << p, 1 << k)[:, accept]
    accepted = int(counts.sum())
    counts = counts[:, 0, :]
    if cl.kind == "swap":
        k0 = counts[:, 0] + counts[:, 3]
    else:
        k0 = counts[:, 0]
    k1 = counts.sum(axis=1) - k0
    return k0, k1, accepted


def run_test_mode(cfg: EnsembleConfig, w, enc: EncodedTrainingSet, x, rng: Optional[np.random.Generator] = None) -> float:
    """Ensemble expectation E[O] = P(output bit = 0) with weights ``w`` (summing to 1)."""
    w = _check_weights(w, cfg.d)
    state, layout = _prepared_state(cfg, enc, x, np.sqrt(w))
    ops = classifier_ops(layout.classifier)
    if cfg.mode == "exact":
        _, state = postselect(state, layout.selection, cfg.accept_outcome)
        run_circuit(state, ops)
        p0, _ = output_distribution(state, layout.classifier)
        return p0
    run_circuit(state, ops)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    k0, k1, _ = _sample_outputs(state, layout, cfg.accept_outcome, cfg.shots, rng)
    total = int(k0.sum() + k1.sum())
    if total == 0:
        return 0.5
    return float(k0.sum() / total)


@dataclass
class TrainOutputs:
    """Per-sample, per-branch statistics from the training circuit.

    ``p[i, c]`` estimates the probability of reading control value c and
    ``p0[i, c]`` the branch's P(output bit = 0). In exact mode ``p`` rows are
    conditional on successful selection and sum to 1; in sampled mode they
    are successful counts over all shots, so rows sum to the observed
    success rate. ``selection`` is the selection-ancilla acceptance rate and
    ``success`` additionally folds in the classifier's own post-selection.
    """

    p: np.ndarray
    p0: np.ndarray
    success: np.ndarray
    selection: np.ndarray
    k0: Optional[np.ndarray] = None
    k1: Optional[np.ndarray] = None
    failed: Optional[np.ndarray] = None
    shots: Optional[int] = None

    def __len__(self) -> int:
        return self.p.shape[0]


def sample_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index), int(stream)]))


def run_train_mode(cfg: EnsembleConfig, enc: EncodedTrainingSet, samples) -> TrainOutputs:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    V, B = samples.shape[0], 1 << cfg.d
    p = np.zeros((V, B))
    p0 = np.full((V, B), 0.5)
    success = np.zeros(V)
    selection = np.zeros(V)
    sampled = cfg.mode == "sampled"
    if sampled:
        k0s = np.zeros((V, B), dtype=np.int64)
        k1s = np.zeros((V, B), dtype=np.int64)
        failed = np.zeros(V, dtype=np.int64)
    for s, x in enumerate(samples):
        state, layout = _prepared_state(cfg, enc, x, _uniform(cfg.d))
        ops = classifier_ops(layout.classifier)
        if sampled:
            run_circuit(state, ops)
            k0, k1, accepted = _sample_outputs(state, layout, cfg.accept_outcome, cfg.shots, sample_rng(cfg.seed, s))
            selection[s] = accepted / cfg.shots
            hits = k0 + k1
            p[s] = hits / cfg.shots
            nz = hits > 0
            p0[s, nz] = k0[nz] / hits[nz]
            k0s[s], k1s[s] = k0, k1
            failed[s] = cfg.shots - hits.sum()
            success[s] = hits.sum() / cfg.shots
            continue
        p_sel, state = postselect(state, layout.selection, cfg.accept_outcome)
        run_circuit(state, ops)
        cl = layout.classifier
        p_cls = 1.0
        for q in cl.postselect_zero:
            pq, state = postselect(state, q, 0)
            p_cls *= pq
        joint = marginal(state, list(cl.output_qubits) + list(layout.control)).reshape(B, -1)
        mass = joint.sum(axis=1)
        zero = joint[:, 0] + joint[:, 3] if cl.kind == "swap" else joint[:, 0]
        p[s] = mass
        nz = mass > EPS_POSTSELECT
        p0[s, nz] = zero[nz] / mass[nz]
        p[s, ~nz] = 0.0
        success[s] = p_sel * p_cls
        selection[s] = p_sel
    if sampled:
        return TrainOutputs(p, p0, success, selection, k0s, k1s, failed, cfg.shots)
    return TrainOutputs(p, p0, success, selection)


# --------------------------------------------------------------------------
# circuit-free per-branch evaluation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchResult:
    outputs: tuple[Optional[ClassifierOutput], ...]
    mass: np.ndarray  # probability weight of each branch under a uniform control register
    prob_zero: np.ndarray


def branch_data(program: SelectionProgram, enc: EncodedTrainingSet, x, masks=None, accept_outcome: int = 0):
    """Yield (vectors, test) per branch with deselected amplitudes zeroed.

    For cosine/distance the test vector lives in the feature register, so it
    is masked per training row; the SWAP classifier's test register is only
    permuted, which leaves inner products unchanged.
    """
    if masks is None:
        masks = kept_masks(program, accept_outcome)
    x = np.asarray(x, dtype=float)
    for c in range(1 << program.d):
        keep = masks[c, : enc.N, : enc.M]
        vecs = enc.vectors * keep
        test = x if program.kind == "swap" else x[None, :] * keep
        yield vecs, test


def branch_outputs(program: SelectionProgram, enc: EncodedTrainingSet, x, masks=None, accept_outcome: int = 0) -> BranchResult:
    kind = program.kind
    labels = enc.labels
    outs, mass, pz = [], [], []
    x = np.asarray(x, dtype=float)
    for vecs, test in branch_data(program, enc, x, masks, accept_outcome):
        vn2 = np.einsum("ij,ij->i", vecs, vecs)
        if kind == "swap":
            z = np.sum(vn2) * (x @ x) / enc.N
        else:
            tn2 = np.einsum("ij,ij->i", test, test)
            z = np.sum(vn2 + tn2) / (2 * enc.N)
        try:
            out = analytic_oracle(kind, vecs, labels, test)
        except (UsageError, ImpossibleOutcome):
            outs.append(None)
            mass.append(0.0)
            pz.append(0.5)
            continue
        outs.append(out)
        mass.append(z * out.success)
        pz.append(out.prob_zero)
    return BranchResult(tuple(outs), np.array(mass), np.array(pz))


def combine_branches(w, mass, prob_zero) -> float:
    w, mass, prob_zero = (np.asarray(a, dtype=float) for a in (w, mass, prob_zero))
    return float(np.sum(w * mass * prob_zero) / np.sum(w * mass))
