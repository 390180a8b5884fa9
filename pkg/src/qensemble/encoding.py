"""Datasets, feature normalisation, and amplitude-encoded initial states.

Register order inside a classifier state, from qubit 0 upward:
classifier auxiliaries, label, feature register, index register, and (SWAP
classifier only) the test register. The ensemble stacks its selection
ancilla and control register on top of that.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import UsageError, ZeroVector
from .statevector import Statevector

EPS_NORM = 1e-12
KINDS = ("cosine", "distance", "swap")


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise UsageError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")
    return kind


def num_qubits_for(count: int) -> int:
    """Smallest q with 2**q >= count."""
    if count < 1:
        raise UsageError("count must be positive")
    return (count - 1).bit_length()


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise UsageError(f"features must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise UsageError(f"{y.shape[0] if y.ndim else 0} labels for {X.shape[0]} rows")
        if not np.all(np.isfinite(X)):
            raise UsageError("features contain non-finite values")
        if not np.all(np.isin(y, (-1, 1))):
            raise UsageError("labels must be -1 or +1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y.astype(int))
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.features[rows], self.labels[rows], self.feature_names)


@dataclass(frozen=True)
class NormalizationSpec:
    kind: str = "none"
    center: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None

    # std: center = mean, scale = population std
    # minmax: center = min, scale = max
    def __post_init__(self):
        if self.kind not in ("none", "std", "minmax"):
            raise UsageError(f"unknown normalisation {self.kind!r}")
        if (self.kind == "none") != (self.center is None):
            raise UsageError("parameters must be present iff kind != 'none'")

    @property
    def mean(self):
        return self.center if self.kind == "std" else None

    @property
    def std(self):
        return self.scale if self.kind == "std" else None

    @property
    def min(self):
        return self.center if self.kind == "minmax" else None

    @property
    def max(self):
        return self.scale if self.kind == "minmax" else None


def fit_normalization(train: Dataset | np.ndarray, kind: str) -> NormalizationSpec:
    X = train.features if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    if kind == "none":
        return NormalizationSpec()
    if X.shape[0] < 2:
        raise UsageError(f"{kind} normalisation needs at least 2 training rows")
    if kind == "std":
        return NormalizationSpec("std", X.mean(axis=0), X.std(axis=0))
    if kind == "minmax":
        return NormalizationSpec("minmax", X.min(axis=0), X.max(axis=0))
    raise UsageError(f"unknown normalisation {kind!r}")


def apply_normalization(spec: NormalizationSpec, x) -> np.ndarray:
    """Normalise a vector or a matrix of rows. Zero-width features map to 0."""
    x = np.asarray(x, dtype=float)
    if spec.kind == "none":
        return x.copy()
    if x.shape[-1] != spec.center.shape[0]:
        raise UsageError(f"expected {spec.center.shape[0]} features, got {x.shape[-1]}")
    if spec.kind == "std":
        width = spec.scale
        shifted = x - spec.center
    else:
        width = spec.scale - spec.center
        shifted = x - spec.center
    safe = np.where(width > 0, width, 1.0)
    out = np.where(width > 0, shifted / safe, 0.0)
    if spec.kind == "minmax":
        out = np.clip(out, 0.0, 1.0)
    return out


def unit_normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm <= EPS_NORM:
        raise ZeroVector(f"vector norm {norm:.3g} too small to encode")
    return x / norm


@dataclass(frozen=True)
class EncodedTrainingSet:
    N: int
    M: int
    n: int
    m: int
    alpha: np.ndarray  # (2**n, 2**m) real
    l: np.ndarray  # (2**n,) label bits

    @property
    def vectors(self) -> np.ndarray:
        """The unit-normalised training rows (padding stripped)."""
        return self.alpha[: self.N, : self.M]

    @property
    def labels(self) -> np.ndarray:
        """Labels in {-1, +1} for the first N rows."""
        return 1 - 2 * self.l[: self.N]


def encode_training_set(train: Dataset) -> EncodedTrainingSet:
    N, M = train.features.shape
    if N < 1 or M < 1:
        raise UsageError("empty training set")
    n, m = num_qubits_for(N), num_qubits_for(M)
    alpha = np.zeros((1 << n, 1 << m))
    for i, row in enumerate(train.features):
        try:
            alpha[i, :M] = unit_normalize(row)
        except ZeroVector as exc:
            raise ZeroVector(f"training row {i}: {exc}") from None
    l = np.zeros(1 << n, dtype=np.int64)
    l[:N] = (1 - train.labels) // 2
    return EncodedTrainingSet(N, M, n, m, alpha, l)


@dataclass(frozen=True)
class ClassifierLayout:
    """Qubit indices of each register; lists run from least significant qubit."""

    kind: str
    n: int
    m: int
    index: tuple[int, ...]
    feature: tuple[int, ...]
    label: int
    swap_control: Optional[int] = None  # cosine, swap
    aux_plus: Optional[int] = None  # cosine
    ancilla: Optional[int] = None  # cosine, distance (the "a" qubit)
    test: tuple[int, ...] = ()  # swap
    num_qubits: int = 0

    @classmethod
    def build(cls, kind: str, n: int, m: int) -> "ClassifierLayout":
        check_kind(kind)
        q = 0
        extra = {}
        if kind == "cosine":
            extra = dict(swap_control=0, aux_plus=1, ancilla=2)
            q = 3
        elif kind == "distance":
            extra = dict(ancilla=0)
            q = 1
        else:
            extra = dict(swap_control=0)
            q = 1
        label = q
        feature = tuple(range(q + 1, q + 1 + m))
        index = tuple(range(q + 1 + m, q + 1 + m + n))
        top = q + 1 + m + n
        test = tuple(range(top, top + m)) if kind == "swap" else ()
        return cls(kind, n, m, index, feature, label, test=test, num_qubits=top + len(test), **extra)

    @property
    def output_qubits(self) -> tuple[int, ...]:
        if self.kind == "cosine":
            return (self.swap_control,)
        if self.kind == "distance":
            return (self.label,)
        return (self.swap_control, self.label)

    @property
    def postselect_zero(self) -> tuple[int, ...]:
        """Qubits the classifier itself conditions on being 0."""
        return (self.ancilla,) if self.kind == "distance" else ()


def build_initial_state(kind: str, enc: EncodedTrainingSet, x) -> tuple[Statevector, ClassifierLayout]:
    """Inject the classifier's initial amplitudes for test vector ``x``.

    ``x`` must have ``enc.M`` entries and unit norm.
    """
    return Statevector(initial_amplitudes(kind, enc, x)), ClassifierLayout.build(kind, enc.n, enc.m)


def initial_amplitudes(kind: str, enc: EncodedTrainingSet, x) -> np.ndarray:
    check_kind(kind)
    x = np.asarray(x, dtype=float)
    if x.shape != (enc.M,):
        raise UsageError(f"test vector has shape {x.shape}, expected ({enc.M},)")
    if abs(np.linalg.norm(x) - 1.0) > 1e-9:
        raise UsageError("test vector must be unit-norm")
    N, n, m = enc.N, enc.n, enc.m
    xp = np.zeros(1 << m)
    xp[: enc.M] = x
    rows = np.arange(N)
    lab = enc.l[:N]
    if kind == "distance":
        # axes: index, feature, label, ancilla
        T = np.zeros((1 << n, 1 << m, 2, 2))
        T[rows, :, lab, 0] = xp / np.sqrt(2 * N)
        T[rows, :, lab, 1] = enc.alpha[:N] / np.sqrt(2 * N)
    elif kind == "cosine":
        # axes: index, feature, label, ancilla, aux_plus, swap_control
        T = np.zeros((1 << n, 1 << m, 2, 2, 2, 2))
        plus = np.sqrt(0.5)
        for aux in (0, 1):
            # a=0 branch: |i>|x_i>|l_i>
            T[rows, :, lab, 0, aux, 0] = enc.alpha[:N] * plus / np.sqrt(2 * N)
            # a=1 branch: |i>|x>|->
            T[rows, :, 0, 1, aux, 0] = xp * plus * plus / np.sqrt(2 * N)
            T[rows, :, 1, 1, aux, 0] = -xp * plus * plus / np.sqrt(2 * N)
    else:
        # axes: test, index, feature, label, swap_control
        T = np.zeros((1 << m, 1 << n, 1 << m, 2, 2))
        for i in range(N):
            T[:, i, :, lab[i], 0] = np.outer(xp, enc.alpha[i]) / np.sqrt(N)
    return T.astype(np.complex128).ravel()
