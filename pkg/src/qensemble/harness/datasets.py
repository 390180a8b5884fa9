"""CSV ingestion and synthetic / bundled benchmark datasets."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..encoding import Dataset
from ..errors import IngestionError

LABEL_COLUMN = "label"

IRIS_PAIRS = {
    "iris_setosa_versicolor": (0, 1),
    "iris_setosa_virginica": (0, 2),
    "iris_versicolor_virginica": (1, 2),
}


def load_dataset(path) -> Dataset:
    """Read a comma-separated file with a header and a ``label`` column.

    Labels may be {-1, +1} or {0, 1}; the latter map to +1/-1 (0 -> +1).
    Every other column is a numeric feature, in header order.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from None
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise IngestionError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if LABEL_COLUMN not in header:
        raise IngestionError(f"{path}: no '{LABEL_COLUMN}' column in header {header}")
    li = header.index(LABEL_COLUMN)
    names = [h for k, h in enumerate(header) if k != li]
    if not names:
        raise IngestionError(f"{path}: no feature columns")
    body = rows[1:]
    if len(body) < 2:
        raise IngestionError(f"{path}: need at least 2 data rows, found {len(body)}")
    X = np.empty((len(body), len(names)))
    raw_labels = np.empty(len(body))
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise IngestionError(f"{path}:{r}: expected {len(header)} cells, found {len(row)}")
        col = 0
        for k, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise IngestionError(f"{path}:{r}: column '{header[k]}' is not numeric: {cell!r}") from None
            if not np.isfinite(value):
                raise IngestionError(f"{path}:{r}: column '{header[k]}' is not finite")
            if k == li:
                raw_labels[r - 2] = value
            else:
                X[r - 2, col] = value
                col += 1
    values = set(np.unique(raw_labels).tolist())
    if values <= {-1.0, 1.0}:
        y = raw_labels.astype(int)
    elif values <= {0.0, 1.0}:
        y = 1 - 2 * raw_labels.astype(int)
    else:
        raise IngestionError(f"{path}: labels must be in {{-1,+1}} or {{0,1}}, found {sorted(values)}")
    return Dataset(X, y, tuple(names))


def save_dataset(ds: Dataset, path) -> None:
    names = ds.feature_names or tuple(f"x{j}" for j in range(ds.num_features))
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow([*names, LABEL_COLUMN])
        for row, y in zip(ds.features, ds.labels):
            out.writerow([*(repr(float(v)) for v in row), int(y)])


def xor_benchmark(seed: int, size: int) -> Dataset:
    """Uniform points in [-1, 1]^2 labelled sign(x * y)."""
    if size < 8:
        raise ValueError("size must be >= 8")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(size, 2))
    prod = pts[:, 0] * pts[:, 1]
    while np.any(prod == 0):
        bad = prod == 0
        pts[bad] = rng.uniform(-1.0, 1.0, size=(int(bad.sum()), 2))
        prod = pts[:, 0] * pts[:, 1]
    return Dataset(pts, np.sign(prod).astype(int), ("x", "y"))


def iris_pair(name: str) -> Dataset:
    """Two-class iris subset from scikit-learn's bundled copy (first class -> +1)."""
    from sklearn.datasets import load_iris

    a, b = IRIS_PAIRS[name]
    data = load_iris()
    keep = np.isin(data.target, (a, b))
    y = np.where(data.target[keep] == a, 1, -1)
    names = tuple(n.replace(" (cm)", "").replace(" ", "_") for n in data.feature_names)
    return Dataset(data.data[keep], y, names)


def export_iris(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in IRIS_PAIRS:
        path = directory / f"{name}.csv"
        save_dataset(iris_pair(name), path)
        paths.append(path)
    return paths
