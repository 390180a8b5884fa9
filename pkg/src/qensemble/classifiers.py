"""Cosine, distance and SWAP-test classifiers: circuits, decoding, closed forms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .encoding import ClassifierLayout, EncodedTrainingSet, build_initial_state, check_kind
from .errors import ImpossibleOutcome, UsageError
from .statevector import EPS_POSTSELECT, H, SWAP, Circuit, GateOp, Statevector, marginal, postselect, run_circuit, sample_indices


def sign_with_tiebreak(score: float) -> int:
    """sign() with sign(0) = +1."""
    score = float(score)
    if math.isnan(score):
        raise UsageError("cannot take the sign of NaN")
    return 1 if score >= 0.0 else -1


@dataclass(frozen=True)
class ClassifierOutput:
    """Decoded classifier result.

    ``raw`` is P(1) on the SWAP control (cosine), P(0|0) (distance) or
    <Z x Z> on (SWAP control, label) (swap). ``prob_zero`` is the
    probability that the single output bit reads 0, where the swap
    classifier's output bit is the parity of its two measured qubits.
    ``success`` is the classifier's own post-selection probability (distance
    ancilla in 0; 1.0 for the other kinds).
    """

    kind: str
    raw: float
    score: float
    label: int
    prob_zero: float
    success: float = 1.0


def decode(kind: str, raw: float, success: float = 1.0) -> ClassifierOutput:
    if kind == "cosine":
        score, p0 = 1.0 - 4.0 * raw, 1.0 - raw
    elif kind == "distance":
        score, p0 = raw - 0.5, raw
    else:
        score, p0 = raw, 0.5 * (1.0 + raw)
    return ClassifierOutput(kind, float(raw), float(score), sign_with_tiebreak(score), float(p0), float(success))


def raw_from_prob_zero(kind: str, prob_zero: float) -> float:
    if kind == "cosine":
        return 1.0 - prob_zero
    if kind == "distance":
        return prob_zero
    return 2.0 * prob_zero - 1.0


def classifier_ops(layout: ClassifierLayout) -> list[GateOp]:
    if layout.kind == "cosine":
        ctl = layout.swap_control
        return [H(ctl), SWAP(layout.aux_plus, layout.ancilla, ctl), H(ctl)]
    if layout.kind == "distance":
        return [H(layout.ancilla)]
    ctl = layout.swap_control
    ops = [H(ctl)]
    ops += [SWAP(f, t, ctl) for f, t in zip(layout.feature, layout.test)]
    ops.append(H(ctl))
    return ops


def append_classifier_circuit(circuit: Circuit, layout: ClassifierLayout) -> Circuit:
    if circuit.num_qubits < layout.num_qubits:
        raise UsageError(f"circuit has {circuit.num_qubits} qubits, layout needs {layout.num_qubits}")
    return circuit.extend(classifier_ops(layout))


def output_distribution(state: Statevector, layout: ClassifierLayout) -> tuple[float, float]:
    """(P(output bit = 0 | classifier post-selection), P(post-selection))."""
    success = 1.0
    for q in layout.postselect_zero:
        p, state = postselect(state, q, 0)
        success *= p
    joint = marginal(state, layout.output_qubits)
    if layout.kind == "swap":
        # index bit0 = swap control, bit1 = label; even parity -> output 0
        p0 = joint[0] + joint[3]
    else:
        p0 = joint[0]
    return float(p0), success


def run_classifier(
    kind: str,
    enc: EncodedTrainingSet,
    x,
    mode: str = "exact",
    shots: int = 8192,
    rng: Optional[np.random.Generator] = None,
) -> ClassifierOutput:
    """Execute the classifier circuit on test vector ``x``.

    In ``sampled`` mode the output is estimated from ``shots`` repetitions;
    for the distance classifier shots whose ancilla reads 1 are discarded.
    """
    check_kind(kind)
    state, layout = build_initial_state(kind, enc, x)
    run_circuit(state, classifier_ops(layout))
    if mode == "exact":
        p0, success = output_distribution(state, layout)
        return decode(kind, raw_from_prob_zero(kind, p0), success)
    if mode != "sampled":
        raise UsageError(f"unknown mode {mode!r}")
    if rng is None:
        raise UsageError("sampled mode needs a random generator")
    return _sampled_output(state, layout, shots, rng)


def _sampled_output(state, layout, shots, rng) -> ClassifierOutput:
    kind = layout.kind
    qubits = list(layout.output_qubits) + list(layout.postselect_zero)
    counts = sample_indices(state, qubits, shots, rng)
    k = len(layout.output_qubits)
    # keep outcomes where every post-selected qubit read 0
    kept = counts[: 1 << k]
    total = int(kept.sum())
    if total == 0:
        raise ImpossibleOutcome("no shot survived the classifier post-selection")
    if kind == "swap":
        p0 = (kept[0] + kept[3]) / total
    else:
        p0 = kept[0] / total
    return decode(kind, raw_from_prob_zero(kind, float(p0)), total / shots)


def analytic_oracle(kind: str, vectors, labels, x) -> ClassifierOutput:
    """Closed-form classifier output from inner products and norms.

    ``vectors`` are the N training vectors (rows; any norm) and ``labels``
    their +/-1 labels. ``x`` is either one test vector or an (N, M) array
    giving a separate test vector for each training row, which is what the
    cosine and distance classifiers see after feature selection.
    """
    check_kind(kind)
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    y = np.asarray(labels, dtype=float).reshape(-1)
    Xt = np.asarray(x, dtype=float)
    if Xt.ndim == 1:
        Xt = np.broadcast_to(Xt, V.shape)
    if Xt.shape != V.shape or y.shape[0] != V.shape[0]:
        raise UsageError(f"shape mismatch: vectors {V.shape}, test {Xt.shape}, labels {y.shape}")
    vn2 = np.einsum("ij,ij->i", V, V)
    xn2 = np.einsum("ij,ij->i", Xt, Xt)
    dots = np.einsum("ij,ij->i", Xt, V)
    if kind == "cosine":
        total = np.sum(xn2 + vn2)
        if total <= EPS_POSTSELECT or not np.any(vn2 > 0):
            raise UsageError("all-zero training set")
        p1 = 0.25 * (1.0 - 2.0 * np.sum(y * dots) / (math.sqrt(2.0) * total))
        return decode(kind, p1)
    if kind == "distance":
        if not np.any(vn2 > 0):
            raise UsageError("all-zero training set")
        sums = np.einsum("ij,ij->i", Xt + V, Xt + V)
        denom = sums.sum()
        if denom <= EPS_POSTSELECT:
            raise ImpossibleOutcome("distance ancilla-0 branch vanishes")
        p00 = sums[y > 0].sum() / denom
        success = denom / (2.0 * np.sum(xn2 + vn2))
        return decode(kind, p00, success)
    norm = np.sum(xn2 * vn2)
    if norm <= EPS_POSTSELECT:
        raise UsageError("all-zero training set")
    # P(q,k) = sum_{l_i=k} (|x|^2|x_i|^2 + (-1)^q |<x|x_i>|^2) / (2 norm)
    expectation = np.sum(y * dots**2) / norm
    return decode(kind, expectation)


def swap_joint_probabilities(vectors, labels, x) -> np.ndarray:
    """P(q, k) for the SWAP classifier as a 2x2 array indexed [q, k]."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    y = np.asarray(labels).reshape(-1)
    x = np.asarray(x, dtype=float)
    vn2 = np.einsum("ij,ij->i", V, V)
    dots2 = (V @ x) ** 2
    xn2 = x @ x
    norm = 2.0 * np.sum(xn2 * vn2)
    out = np.empty((2, 2))
    for q in (0, 1):
        for k in (0, 1):
            mask = (1 - y) // 2 == k
            out[q, k] = np.sum(xn2 * vn2[mask] + (-1) ** q * dots2[mask]) / norm
    return out
