"""Detail/summary emission of cross-validation results and re-reading them."""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import QEnsembleError, UsageError
from .cv import RunResult

DETAIL_COLUMNS = [
    "dataset", "normalization", "kind", "d", "run", "seed", "mode", "shots",
    "single_accuracy", "internal_mean_accuracy", "internal_accuracies",
    "ensemble_accuracy", "selection_success", "seconds", "weights",
]
METRICS = ["single_accuracy", "internal_mean_accuracy", "ensemble_accuracy", "selection_success"]
GROUP_KEYS = ["dataset", "normalization", "kind", "d", "mode"]


class OutputError(QEnsembleError):
    exit_code = 6


def _join(values) -> str:
    return ";".join(repr(float(v)) for v in values)


def _split(text: str) -> list[float]:
    return [float(v) for v in text.split(";")] if text else []


def detail_row(r: RunResult) -> dict:
    row = asdict(r)
    row["internal_mean_accuracy"] = r.internal_mean_accuracy
    return row


def summarize(results: list[RunResult]) -> list[dict]:
    groups = defaultdict(list)
    for r in results:
        groups[tuple(getattr(r, k) for k in GROUP_KEYS)].append(r)
    summary = []
    for key, rows in groups.items():
        entry = dict(zip(GROUP_KEYS, key))
        entry["runs"] = len(rows)
        for metric in METRICS:
            vals = np.array([detail_row(r)[metric] for r in rows])
            entry[f"{metric}_mean"] = float(vals.mean())
            entry[f"{metric}_std"] = float(vals.std())
        summary.append(entry)
    return summary


def emit_results(results: list[RunResult], path, format: str = "csv") -> list[Path]:
    """Write results; returns the files written.

    ``csv`` writes the detail table to ``path`` and the summary next to it
    as ``<stem>.summary.json``. ``json`` writes one document holding both.
    """
    if not results:
        raise UsageError("no results to emit")
    path = Path(path)
    summary = summarize(results)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if format == "json":
            doc = {"runs": [detail_row(r) for r in results], "summary": summary}
            path.write_text(json.dumps(doc, indent=2))
            return [path]
        if format != "csv":
            raise UsageError(f"unknown format {format!r}")
        with path.open("w", newline="") as fh:
            out = csv.DictWriter(fh, fieldnames=DETAIL_COLUMNS)
            out.writeheader()
            for r in results:
                row = detail_row(r)
                row["internal_accuracies"] = _join(r.internal_accuracies)
                row["weights"] = _join(r.weights)
                out.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
        summary_path = path.with_name(path.stem + ".summary.json")
        summary_path.write_text(json.dumps({"summary": summary}, indent=2))
        return [path, summary_path]
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None


def _from_row(row: dict) -> RunResult:
    return RunResult(
        dataset=row["dataset"],
        normalization=row["normalization"],
        kind=row["kind"],
        d=int(row["d"]),
        run=int(row["run"]),
        seed=int(row["seed"]),
        mode=row["mode"],
        shots=int(row["shots"]),
        single_accuracy=float(row["single_accuracy"]),
        internal_accuracies=row["internal_accuracies"] if isinstance(row["internal_accuracies"], list) else _split(row["internal_accuracies"]),
        ensemble_accuracy=float(row["ensemble_accuracy"]),
        selection_success=float(row["selection_success"]),
        seconds=float(row["seconds"]),
        weights=row["weights"] if isinstance(row["weights"], list) else _split(row["weights"]),
    )


def read_results(path) -> list[RunResult]:
    path = Path(path)
    if path.suffix == ".json":
        return [_from_row(row) for row in json.loads(path.read_text())["runs"]]
    with path.open(newline="") as fh:
        return [_from_row(row) for row in csv.DictReader(fh)]
