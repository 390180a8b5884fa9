"""Exact statevector simulation: gates, marginals, post-selection, sampling.

Basis-state index ``b`` has qubit ``k`` in state ``(b >> k) & 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ImpossibleOutcome, UsageError

EPS_POSTSELECT = 1e-12
DENSE_MAX_QUBITS = 10

GATE_ARITY = {"H": 1, "X": 1, "SWAP": 2}


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        if self.kind not in GATE_ARITY:
            raise UsageError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != GATE_ARITY[self.kind]:
            raise UsageError(f"{self.kind} takes {GATE_ARITY[self.kind]} target(s), got {self.targets}")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise UsageError(f"targets and controls overlap: {self}")
        if min(qubits) < 0:
            raise UsageError(f"negative qubit index in {self}")

    @property
    def max_qubit(self) -> int:
        return max(self.targets + self.controls)

    def check(self, num_qubits: int) -> None:
        if self.max_qubit >= num_qubits:
            raise UsageError(f"{self} addresses qubit {self.max_qubit} on a {num_qubits}-qubit state")


def H(target: int, *controls: int) -> GateOp:
    return GateOp("H", (target,), controls)


def X(target: int, *controls: int) -> GateOp:
    return GateOp("X", (target,), controls)


def SWAP(a: int, b: int, *controls: int) -> GateOp:
    return GateOp("SWAP", (a, b), controls)


@dataclass
class Circuit:
    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def append(self, op: GateOp) -> "Circuit":
        op.check(self.num_qubits)
        self.ops.append(op)
        return self

    def extend(self, ops) -> "Circuit":
        for op in ops:
            self.append(op)
        return self

    def __len__(self) -> int:
        return len(self.ops)


class Statevector:
    """Complex amplitudes over ``num_qubits`` qubits.

    Gate application mutates ``amplitudes`` in place; use :meth:`copy` to
    keep the original.
    """

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes, num_qubits: int | None = None, *, normalize: bool = False):
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128).ravel()
        size = amps.size
        if size == 0 or size & (size - 1):
            raise UsageError(f"amplitude length {size} is not a power of two")
        nq = size.bit_length() - 1
        if num_qubits is not None and num_qubits != nq:
            raise UsageError(f"{size} amplitudes do not describe {num_qubits} qubits")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm <= EPS_POSTSELECT:
                raise UsageError("cannot normalise a zero state")
            amps = amps / norm
        self.num_qubits = nq
        self.amplitudes = amps

    @classmethod
    def zero(cls, num_qubits: int) -> "Statevector":
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "Statevector":
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag

    def __repr__(self) -> str:
        return f"Statevector(num_qubits={self.num_qubits})"


def _check_qubit(state: Statevector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise UsageError(f"qubit {qubit} out of range for {state.num_qubits} qubits")


def apply_gate(state: Statevector, op: GateOp) -> Statevector:
    """Apply ``op`` in place and return ``state``."""
    op.check(state.num_qubits)
    cmask = 0
    for c in op.controls:
        cmask |= 1 << c
    amps = state.amplitudes
    if op.kind == "X":
        _kernels.apply_x(amps, op.targets[0], cmask)
    elif op.kind == "H":
        _kernels.apply_h(amps, op.targets[0], cmask)
    else:
        _kernels.apply_swap(amps, op.targets[0], op.targets[1], cmask)
    return state


def run_circuit(state: Statevector, circuit: Circuit | Sequence[GateOp]) -> Statevector:
    ops = circuit.ops if isinstance(circuit, Circuit) else circuit
    for op in ops:
        apply_gate(state, op)
    return state


def probability(state: Statevector, qubit: int, outcome: int) -> float:
    _check_qubit(state, qubit)
    probs = state.probabilities().reshape(-1, 2, 1 << qubit)
    return float(probs[:, outcome, :].sum())


def marginal(state: Statevector, qubits: Sequence[int]) -> np.ndarray:
    """Joint distribution of ``qubits``; entry ``k`` has bit ``t`` equal to the outcome of ``qubits[t]``."""
    if len(qubits) == 0:
        raise UsageError("empty qubit list")
    for q in qubits:
        _check_qubit(state, q)
    if len(set(qubits)) != len(qubits):
        raise UsageError(f"repeated qubits in {qubits}")
    n = state.num_qubits
    # axis a of the reshaped tensor is qubit n-1-a
    tensor = state.probabilities().reshape((2,) * n)
    axes = [n - 1 - q for q in qubits]
    rest = tuple(a for a in range(n) if a not in axes)
    reduced = tensor.sum(axis=rest) if rest else tensor
    # remaining axes are in increasing order; reorder to qubits[-1], ..., qubits[0]
    order = sorted(axes)
    perm = [order.index(axes[t]) for t in reversed(range(len(qubits)))]
    return np.transpose(reduced, perm).reshape(-1)


def postselect(state: Statevector, qubit: int, outcome: int) -> tuple[float, Statevector]:
    """Project ``qubit`` onto ``outcome`` and renormalise.

    Returns the pre-collapse probability of ``outcome`` and a new state.
    """
    prob = probability(state, qubit, outcome)
    if prob <= EPS_POSTSELECT:
        raise ImpossibleOutcome(f"P(qubit {qubit} = {outcome}) = {prob:.3g}")
    amps = state.amplitudes.copy().reshape(-1, 2, 1 << qubit)
    amps[:, 1 - outcome, :] = 0.0
    amps /= np.sqrt(prob)
    return prob, Statevector(amps)


def sample_indices(state: Statevector, qubits: Sequence[int], shots: int, rng: np.random.Generator) -> np.ndarray:
    """Counts per joint outcome of ``qubits`` (integer-indexed as in :func:`marginal`)."""
    if shots < 1:
        raise UsageError("shots must be >= 1")
    pvals = marginal(state, qubits)
    pvals = np.clip(pvals, 0.0, None)
    pvals /= pvals.sum()
    return rng.multinomial(shots, pvals)


def sample(state: Statevector, qubits: Sequence[int], shots: int, rng: np.random.Generator) -> dict[str, int]:
    """Measurement counts keyed by bitstring; character ``t`` is the outcome of ``qubits[t]``."""
    counts = sample_indices(state, qubits, shots, rng)
    k = len(qubits)
    out = {}
    for idx in np.flatnonzero(counts):
        key = "".join(str((int(idx) >> t) & 1) for t in range(k))
        out[key] = int(counts[idx])
    return out


# --------------------------------------------------------------------------
# dense reference path
# --------------------------------------------------------------------------

_I2 = np.eye(2, dtype=np.complex128)
_P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_H2 = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def _embed(n: int, local: dict[int, np.ndarray]) -> np.ndarray:
    """Kronecker product with ``local[q]`` on qubit q and identity elsewhere."""
    out = np.ones((1, 1), dtype=np.complex128)
    for q in reversed(range(n)):
        out = np.kron(out, local.get(q, _I2))
    return out


def dense_matrix(op: GateOp, num_qubits: int) -> np.ndarray:
    op.check(num_qubits)
    if num_qubits > DENSE_MAX_QUBITS:
        raise UsageError(f"dense construction limited to {DENSE_MAX_QUBITS} qubits")
    n = num_qubits
    if op.kind == "H":
        gate = _embed(n, {op.targets[0]: _H2})
    elif op.kind == "X":
        gate = _embed(n, {op.targets[0]: _PAULI["X"]})
    else:
        a, b = op.targets
        # SWAP = (I + XX + YY + ZZ) / 2
        gate = _embed(n, {}) + sum(_embed(n, {a: P, b: P}) for P in _PAULI.values())
        gate = gate / 2
    if not op.controls:
        return gate
    proj = _embed(n, {c: _P1 for c in op.controls})
    eye = np.eye(1 << n, dtype=np.complex128)
    return eye + proj @ (gate - eye)


def dense_oracle_apply(state: Statevector, op: GateOp) -> Statevector:
    """Reference implementation of :func:`apply_gate` through an explicit full matrix."""
    if state.num_qubits > DENSE_MAX_QUBITS:
        raise UsageError(f"dense oracle limited to {DENSE_MAX_QUBITS} qubits")
    return Statevector(dense_matrix(op, state.num_qubits) @ state.amplitudes)
