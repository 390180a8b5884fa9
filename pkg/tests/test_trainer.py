import itertools
from types import SimpleNamespace

import numpy as np
import pytest

from qensemble.errors import DegenerateCombination, DegenerateLabels, DegenerateModel, UsageError
from qensemble.trainer import (
    OptimizerConfig, StackingModel, ensemble_output, fit_stacking, log_loss, log_loss_gradient, predict,
    sigmoid, signed_weight_combine, targets_from_labels,
)


def outputs(p, p0):
    return SimpleNamespace(p=np.asarray(p, float), p0=np.asarray(p0, float))


def signal_problem(rng, V=40):
    """Branch 0 tracks the label, branch 1 is noise."""
    y = np.array([1, -1] * (V // 2))
    p = rng.dirichlet([5, 5], size=V)
    p0 = np.column_stack([0.5 + 0.2 * y + rng.normal(0, 0.05, V), rng.uniform(0.2, 0.8, V)])
    return outputs(p, p0), y


def test_ensemble_output_example():
    assert ensemble_output([0.5, 0.5], [1.0, 0.0], [0.2, 0.9]) == pytest.approx(0.2)
    assert ensemble_output([0.25, 0.75], [0.5, 0.5], [0.2, 0.6]) == pytest.approx(0.5)
    with pytest.raises(DegenerateCombination):
        ensemble_output([1.0, 0.0], [0.0, 1.0], [0.2, 0.9])


def test_loss_at_zero_logit_is_ln2():
    out = outputs([[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]])
    model = StackingModel(np.array([0.5, 0.5]), -5.0, 10.0)
    assert log_loss(model, out, [1, -1]) == pytest.approx(np.log(2), abs=1e-15)


def test_gradient_matches_finite_differences(rng):
    out, y = signal_problem(rng, 12)
    out.p = np.column_stack([out.p, rng.uniform(0.1, 1, 12)])
    out.p0 = np.column_stack([out.p0, rng.uniform(0, 1, 12)])
    theta = np.array([0.2, 0.5, 0.3, -0.7, 3.0])
    model = lambda t: StackingModel(t[:3], t[3], t[4])
    grad = log_loss_gradient(model(theta), out, y)
    h = 1e-6
    for k in range(len(theta)):
        e = np.eye(len(theta))[k] * h
        fd = (log_loss(model(theta + e), out, y) - log_loss(model(theta - e), out, y)) / (2 * h)
        assert grad[k] == pytest.approx(fd, abs=1e-7)


def test_fit_finds_informative_branch(rng):
    out, y = signal_problem(rng)
    model = fit_stacking(out, y)
    assert model.w.sum() == pytest.approx(1.0)
    assert model.w[0] > 0.9
    # no coarse grid point beats the optimiser
    t = targets_from_labels(y)
    best = np.inf
    for w0, b, k in itertools.product(np.linspace(0, 1, 21), np.linspace(-30, 10, 41), np.linspace(0, 60, 61)):
        E = ensemble_output([w0, 1 - w0], out.p, out.p0) if 0 < w0 < 1 else out.p0[:, 0 if w0 == 1 else 1]
        s = np.clip(sigmoid(k * E + b), 1e-12, 1 - 1e-12)
        best = min(best, -np.mean(t * np.log(s) + (1 - t) * np.log(1 - s)))
    fitted = log_loss(StackingModel(model.w, model.b, model.k), out, y)
    assert fitted <= best + 1e-9
    accuracy = np.mean([predict(model, e) for e in ensemble_output(model.w, out.p, out.p0)] == y)
    assert accuracy > 0.9


def test_fit_without_signal_stays_at_ln2():
    y = np.array([1, -1] * 10)
    out = outputs(np.full((20, 4), 0.25), np.full((20, 4), 0.5))
    model = fit_stacking(out, y)
    assert log_loss(model, out, y) == pytest.approx(np.log(2), abs=1e-6)


def test_fit_never_worse_than_start(rng):
    out, y = signal_problem(rng, 10)
    cfg = OptimizerConfig(max_iterations=1)
    start = StackingModel(np.array([0.5, 0.5]), 0.0, 10.0)
    assert log_loss(fit_stacking(out, y, cfg), out, y) <= log_loss(start, out, y) + 1e-12


def test_fit_needs_both_classes():
    out = outputs(np.full((4, 2), 0.5), np.full((4, 2), 0.5))
    with pytest.raises(DegenerateLabels):
        fit_stacking(out, [1, 1, 1, 1])


def test_predict():
    model = StackingModel(np.array([1.0]), -5.0, 10.0)
    assert predict(model, 0.7) == 1
    assert predict(model, 0.3) == -1
    assert predict(model, 0.5) == 1
    with pytest.raises(DegenerateModel):
        predict(StackingModel(np.array([1.0]), 0.0, 0.0), 0.5)


def test_prediction_monotone_in_expectation():
    model = StackingModel(np.array([1.0]), -4.0, 10.0)
    labels = [predict(model, e) for e in np.linspace(0, 1, 101)]
    assert labels == sorted(labels)


def test_sigmoid_identity():
    z = np.linspace(-40, 40, 81)
    np.testing.assert_allclose(sigmoid(z) + sigmoid(-z), 1.0, atol=1e-15)
    assert sigmoid(0.0) == 0.5


def test_targets():
    np.testing.assert_array_equal(targets_from_labels([1, -1]), [1.0, 0.0])
    np.testing.assert_array_equal(targets_from_labels([0, 1]), [0.0, 1.0])
    with pytest.raises(UsageError):
        targets_from_labels([2, 1])


def test_signed_weight_combine_recovers_linear_form(rng):
    beta = rng.normal(size=5)
    run = lambda v: float(v @ beta)
    w = rng.normal(size=5)
    b = 1.0 - w.min()
    assert signed_weight_combine(w, b, run) == pytest.approx(w @ beta / np.abs(w).sum(), abs=1e-12)
    u = np.full(5, 0.2)
    assert signed_weight_combine(u, 0.3, run) == pytest.approx(run(u), abs=1e-12)


def test_signed_weight_combine_errors():
    run = lambda v: 0.0
    with pytest.raises(UsageError):
        signed_weight_combine([1.0, -2.0], 1.0, run)
    with pytest.raises(UsageError):
        signed_weight_combine([1.0, 2.0], 0.0, run)
    with pytest.raises(DegenerateCombination):
        signed_weight_combine([0.0, 0.0], 1.0, run)


def test_normalized_model():
    assert np.allclose(StackingModel(np.array([1.0, 3.0]), 0, 1).normalized().w, [0.25, 0.75])
    with pytest.raises(DegenerateCombination):
        StackingModel(np.zeros(2), 0, 1).normalized()


def test_ensemble_output_reference_cases(rng):
    assert ensemble_output([0.5, 0.5], [0.2, 0.8], [1.0, 0.0]) == pytest.approx(0.2, abs=1e-15)
    assert ensemble_output([1.0], [0.7], [0.35]) == 0.35
    p0 = rng.uniform(size=8)
    assert ensemble_output(np.full(8, 0.125), np.full(8, 0.3), p0) == pytest.approx(p0.mean(), abs=1e-15)


def test_predict_reference_cases(rng):
    model = StackingModel(np.array([1.0]), -0.5, 1.0)
    assert predict(model, 0.7) == 1 and predict(model, 0.3) == -1
    for z in rng.normal(scale=20, size=1000):
        assert np.sign(sigmoid(z) - 0.5) in (0.0, 1.0 if z > 0 else -1.0)
        assert predict(StackingModel(np.array([1.0]), z, 1.0), 0.0) == (1 if z >= 0 else -1)


def test_separated_outputs_drive_loss_down():
    y = np.array([1, -1] * 5)
    out = outputs(np.ones((10, 1)), ((1 + y) / 2)[:, None])
    losses = [log_loss(StackingModel(np.array([1.0]), -k / 2, k), out, y) for k in (1, 5, 10, 20, 40)]
    assert all(a > b for a, b in zip(losses, losses[1:]))
    assert losses[-1] < 1e-8


def test_signed_weight_combine_limits(rng):
    beta = rng.normal(size=4)
    run = lambda v: float(v @ beta)
    w = rng.uniform(0.1, 1, 4)
    direct = run(w / w.sum())
    assert signed_weight_combine(w, 1e6, run) == pytest.approx(direct, abs=1e-9)
    const = lambda v: 0.4 * float(np.sum(v))
    w = rng.normal(size=4)
    assert signed_weight_combine(w, 1 - w.min() + 0.1, const) == pytest.approx(0.4 * w.sum() / np.abs(w).sum(), abs=1e-12)
