"""Monte Carlo cross-validation of single, internal and ensemble classifiers."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..classifiers import run_classifier
from ..encoding import Dataset, apply_normalization, encode_training_set, fit_normalization, unit_normalize
from ..ensemble import (
    EnsembleConfig,
    branch_outputs,
    build_selection_program,
    kept_masks,
    run_test_mode,
    run_train_mode,
    sample_rng,
)
from ..errors import DegenerateLabels
from ..trainer import fit_stacking, predict
from .config import ExperimentConfig
from .datasets import load_dataset

log = logging.getLogger(__name__)

# independent random streams per run
_SINGLE_STREAM = 1
_TEST_STREAM = 2


@dataclass
class RunResult:
    dataset: str
    normalization: str
    kind: str
    d: int
    run: int
    seed: int
    mode: str
    shots: int
    single_accuracy: float
    internal_accuracies: list[float]
    ensemble_accuracy: float
    selection_success: float
    seconds: float
    weights: list[float] = field(default_factory=list)

    @property
    def internal_mean_accuracy(self) -> float:
        return float(np.mean(self.internal_accuracies))


def run_seed(master_seed: int, run: int, attempt: int = 0) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(run), int(attempt)]).generate_state(1)[0])


def split_indices(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    perm = np.random.default_rng(seed).permutation(n)
    n_train = min(max(int(round(fraction * n)), 1), n - 1)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def draw_split(ds: Dataset, fraction: float, master_seed: int, run: int):
    """Split for run ``run``; re-drawn once if the training part holds a single class."""
    for attempt in (0, 1):
        seed = run_seed(master_seed, run, attempt)
        train, test = split_indices(len(ds), fraction, seed)
        if len(np.unique(ds.labels[train])) == 2:
            return train, test, seed
    raise DegenerateLabels(f"run {run}: training split has a single class after a re-draw")


def _unit_rows(X):
    return np.array([unit_normalize(row) for row in X])


def evaluate_split(
    train: Dataset,
    test: Dataset,
    *,
    normalization: str,
    kind: str,
    d_values,
    mode: str = "exact",
    shots: int = 8192,
    seed: int = 0,
    weights_on: str = "train",
    dataset_name: str = "",
    run: int = 0,
) -> list[RunResult]:
    """Evaluate one train/test split for every ``d`` in ``d_values``."""
    spec = fit_normalization(train, normalization)
    Xtr = apply_normalization(spec, train.features)
    Xte = _unit_rows(apply_normalization(spec, test.features))
    fit_rows = np.arange(len(train))
    val_rows = fit_rows
    if weights_on == "holdout":
        fit_rows, val_rows = split_indices(len(train), 0.75, seed)
    enc = encode_training_set(Dataset(Xtr[fit_rows], train.labels[fit_rows]))
    Xval = _unit_rows(Xtr[val_rows])
    yval = train.labels[val_rows]

    t0 = time.perf_counter()
    single_hits = 0
    for s, x in enumerate(Xte):
        rng = sample_rng(seed, s, _SINGLE_STREAM) if mode == "sampled" else None
        out = run_classifier(kind, enc, x, mode=mode, shots=shots, rng=rng)
        single_hits += out.label == test.labels[s]
    single_acc = single_hits / len(test)
    single_time = time.perf_counter() - t0

    results = []
    for d in d_values:
        t0 = time.perf_counter()
        cfg = EnsembleConfig(d=d, kind=kind, mode=mode, shots=shots, seed=seed)
        program = build_selection_program(enc.n, enc.m, d, kind)
        masks = kept_masks(program)
        internal_hits = np.zeros(1 << d)
        for s, x in enumerate(Xte):
            br = branch_outputs(program, enc, x, masks)
            for c, out in enumerate(br.outputs):
                internal_hits[c] += out is not None and out.label == test.labels[s]
        outputs = run_train_mode(cfg, enc, Xval)
        model = fit_stacking(outputs, yval)
        ens_hits = 0
        for s, x in enumerate(Xte):
            rng = sample_rng(seed, s, _TEST_STREAM) if mode == "sampled" else None
            e = run_test_mode(cfg, model.w, enc, x, rng=rng)
            ens_hits += predict(model, e) == test.labels[s]
        results.append(
            RunResult(
                dataset=dataset_name,
                normalization=normalization,
                kind=kind,
                d=d,
                run=run,
                seed=seed,
                mode=mode,
                shots=shots if mode == "sampled" else 0,
                single_accuracy=float(single_acc),
                internal_accuracies=[float(a) for a in internal_hits / len(test)],
                ensemble_accuracy=float(ens_hits / len(test)),
                selection_success=float(np.mean(outputs.selection)),
                seconds=single_time + time.perf_counter() - t0,
                weights=[float(v) for v in model.w],
            )
        )
    return results


def monte_carlo_cv(cfg: ExperimentConfig, datasets: Optional[dict[str, Dataset]] = None) -> list[RunResult]:
    """Run every (dataset, run, normalisation, kind) combination of ``cfg``.

    ``datasets`` maps names to already-loaded data; otherwise each entry of
    ``cfg.datasets`` is read from disk.
    """
    if datasets is None:
        datasets = {Path(p).stem: load_dataset(p) for p in cfg.datasets}
    results = []
    for name, ds in datasets.items():
        for r in range(cfg.runs):
            train_idx, test_idx, seed = draw_split(ds, cfg.split, cfg.seed, r)
            train, test = ds.subset(train_idx), ds.subset(test_idx)
            for norm in cfg.normalizations:
                for kind in cfg.kinds:
                    log.info("%s run %d %s %s", name, r, norm, kind)
                    results.extend(
                        evaluate_split(
                            train,
                            test,
                            normalization=norm,
                            kind=kind,
                            d_values=cfg.d_values,
                            mode=cfg.mode,
                            shots=cfg.shots,
                            seed=seed,
                            weights_on=cfg.weights_on,
                            dataset_name=name,
                            run=r,
                        )
                    )
    return results
