"""Logistic stacking of the internal classifiers' outputs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .classifiers import sign_with_tiebreak
from .errors import DegenerateCombination, DegenerateLabels, DegenerateModel, UsageError

PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class StackingModel:
    w: np.ndarray
    b: float
    k: float

    def normalized(self) -> "StackingModel":
        total = float(np.sum(self.w))
        if total <= 0:
            raise DegenerateCombination("weights sum to zero")
        return StackingModel(np.asarray(self.w, dtype=float) / total, self.b, self.k)


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 500
    gtol: float = 1e-10
    initial_k: float = 10.0
    initial_b: float = 0.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise UsageError("max_iterations must be >= 1")
        if self.gtol <= 0:
            raise UsageError("gtol must be positive")


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def ensemble_output(w, p_row, p0_row) -> float | np.ndarray:
    """sum_c w_c p_c p0_c / sum_c w_c p_c, row-wise if given matrices."""
    w = np.asarray(w, dtype=float)
    p, p0 = np.asarray(p_row, dtype=float), np.asarray(p0_row, dtype=float)
    den = p @ w
    if np.any(den <= 0):
        raise DegenerateCombination("sum_c w_c p_c is zero")
    out = (p * p0) @ w / den
    return float(out) if np.ndim(out) == 0 else out


def targets_from_labels(labels) -> np.ndarray:
    """+1 -> 1, -1 -> 0, so that sigma(z) > 1/2 predicts +1. 0/1 input passes through."""
    y = np.asarray(labels)
    if np.all(np.isin(y, (0, 1))) and not np.any(y == -1):
        return y.astype(float)
    if not np.all(np.isin(y, (-1, 1))):
        raise UsageError("labels must be in {-1,+1} or {0,1}")
    return (1.0 + y) / 2.0


def _unpack(theta, B):
    return theta[:B], theta[B], theta[B + 1]


def _loss_and_grad(theta, p, p0, t, floor=0.0):
    B = p.shape[1]
    w, b, k = _unpack(theta, B)
    den = p @ w
    if floor:
        den = np.maximum(den, floor)
    elif np.any(den <= 0):
        raise DegenerateCombination("sum_c w_c p_c is zero")
    num = (p * p0) @ w
    E = num / den
    z = k * E + b
    s = sigmoid(z)
    sc = np.clip(s, PROB_CLAMP, 1 - PROB_CLAMP)
    n = len(t)
    loss = -np.mean(t * np.log(sc) + (1 - t) * np.log(1 - sc))
    # d loss / dz, zero where the clamp is active
    active = (s > PROB_CLAMP) & (s < 1 - PROB_CLAMP)
    dz = np.where(active, s - t, 0.0) / n
    dE_dw = p * (p0 - E[:, None]) / den[:, None]
    grad = np.concatenate([(dz * k) @ dE_dw, [dz.sum()], [dz @ E]])
    return loss, grad


def _as_arrays(train_outputs, labels):
    p, p0 = np.asarray(train_outputs.p, dtype=float), np.asarray(train_outputs.p0, dtype=float)
    return p, p0, targets_from_labels(labels)


def log_loss(params: StackingModel, train_outputs, labels) -> float:
    p, p0, t = _as_arrays(train_outputs, labels)
    theta = np.concatenate([np.asarray(params.w, dtype=float), [params.b, params.k]])
    return float(_loss_and_grad(theta, p, p0, t)[0])


def log_loss_gradient(params: StackingModel, train_outputs, labels) -> np.ndarray:
    """Gradient w.r.t. (w_0..w_{B-1}, b, k)."""
    p, p0, t = _as_arrays(train_outputs, labels)
    theta = np.concatenate([np.asarray(params.w, dtype=float), [params.b, params.k]])
    return _loss_and_grad(theta, p, p0, t)[1]


def fit_stacking(train_outputs, labels, cfg: Optional[OptimizerConfig] = None) -> StackingModel:
    """Bounded L-BFGS-B fit of (w >= 0, b, k); w is returned rescaled to sum 1."""
    cfg = cfg or OptimizerConfig()
    p, p0, t = _as_arrays(train_outputs, labels)
    if len(t) < 2 or np.all(t == t[0]):
        raise DegenerateLabels("stacking needs at least two samples from both classes")
    B = p.shape[1]
    theta0 = np.concatenate([np.full(B, 1.0 / B), [cfg.initial_b, cfg.initial_k]])
    loss0, _ = _loss_and_grad(theta0, p, p0, t)
    res = minimize(
        _loss_and_grad,
        theta0,
        args=(p, p0, t, 1e-300),
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, None)] * B + [(None, None)] * 2,
        options={"maxiter": cfg.max_iterations, "gtol": cfg.gtol, "ftol": 1e-15},
    )
    theta = res.x
    w = np.clip(theta[:B], 0.0, None)
    try:
        loss1 = _loss_and_grad(np.concatenate([w, theta[B:]]), p, p0, t)[0]
    except DegenerateCombination:
        loss1 = np.inf
    if not loss1 <= loss0:
        w, theta = theta0[:B], theta0
    return StackingModel(w, float(theta[B]), float(theta[B + 1])).normalized()


def predict(model: StackingModel, expectation: float) -> int:
    if model.k == 0:
        raise DegenerateModel("scale k is zero")
    return sign_with_tiebreak(model.k * expectation + model.b)


def signed_weight_combine(w_signed, b_shift: float, run: Callable[[np.ndarray], float]) -> float:
    """Recover w.beta / ||w||_1 for signed ``w`` from two positive-weight runs.

    ``run`` receives a weight vector summing to 1 and returns the ensemble
    expectation for it. Weights are shifted by ``b_shift`` to make them
    positive; the uniform run with weights ``b_shift`` is subtracted.
    """
    w = np.asarray(w_signed, dtype=float)
    if b_shift <= 0:
        raise UsageError("b_shift must be positive")
    shifted = w + b_shift
    if np.any(shifted <= 0):
        raise UsageError("w + b_shift must be elementwise positive")
    bias = np.full_like(w, b_shift)
    s_sum, b_sum = shifted.sum(), bias.sum()
    norm = np.abs(w).sum()
    if norm == 0:
        raise DegenerateCombination("zero weight vector")
    return float((s_sum * run(shifted / s_sum) - b_sum * run(bias / b_sum)) / norm)
