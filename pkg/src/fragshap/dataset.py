"""Tabular datasets: CSV ingestion, splitting, and synthetic generation."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """Raised on malformed input data."""


@dataclass(frozen=True)
class Dataset:
    """A numeric feature matrix with one integer class label per row."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        x = np.array(self.features, dtype=float)
        y = np.array(self.labels, dtype=np.intp)
        if x.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if y.shape != (x.shape[0],):
            raise DataError("labels must align with feature rows")
        if not np.isfinite(x).all():
            raise DataError("features contain non-finite values")
        if self.class_count < 1:
            raise DataError("class_count must be positive")
        if y.size and (y.min() < 0 or y.max() >= self.class_count):
            raise DataError("labels must lie in 0..class_count-1")
        if self.feature_names is not None and len(self.feature_names) != x.shape[1]:
            raise DataError("feature_names must align with feature columns")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_cols(self) -> int:
        return self.features.shape[1]

    def replace_features(self, features: np.ndarray) -> Dataset:
        return Dataset(features, self.labels, self.class_count, self.feature_names)

    def take_rows(self, rows: np.ndarray) -> Dataset:
        return Dataset(
            self.features[rows], self.labels[rows], self.class_count, self.feature_names
        )


def _map_labels(raw: list[str]) -> tuple[np.ndarray, int]:
    try:
        keys = sorted(set(raw), key=float)
    except ValueError:
        keys = sorted(set(raw))
    index = {k: i for i, k in enumerate(keys)}
    return np.array([index[v] for v in raw], dtype=np.intp), len(keys)


def load_csv(path: str, label_col: str, *, impute_mean: bool = False) -> Dataset:
    """Load a CSV with a header row; ``label_col`` names the label column.

    Non-numeric feature cells are an error unless ``impute_mean`` is set, in
    which case they are filled with the column mean of the parseable values.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if label_col not in header:
        raise DataError(f"{path}: no column named {label_col!r}")
    label_idx = header.index(label_col)
    feature_names = tuple(name for k, name in enumerate(header) if k != label_idx)
    labels_raw: list[str] = []
    matrix: list[list[float]] = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: line {r} has {len(row)} fields, expected {len(header)}")
        labels_raw.append(row[label_idx].strip())
        parsed: list[float] = []
        for k, cell in enumerate(row):
            if k == label_idx:
                continue
            try:
                parsed.append(float(cell))
            except ValueError:
                if not impute_mean:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at line {r}, column {header[k]!r}"
                    ) from None
                parsed.append(np.nan)
        matrix.append(parsed)
    if not matrix:
        raise DataError(f"{path}: no data rows")
    x = np.array(matrix, dtype=float)
    if impute_mean and np.isnan(x).any():
        for j in range(x.shape[1]):
            col = x[:, j]
            missing = np.isnan(col)
            if missing.all():
                raise DataError(f"{path}: column {feature_names[j]!r} has no numeric values")
            col[missing] = col[~missing].mean()
    labels, class_count = _map_labels(labels_raw)
    return Dataset(x, labels, class_count, feature_names)


def split_dataset(dataset: Dataset, test_frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split into (train, test); row order stays ascending."""
    if not 0.0 < test_frac < 1.0:
        raise DataError("test fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(dataset.n_rows)
    n_test = min(max(int(round(test_frac * dataset.n_rows)), 1), dataset.n_rows - 1)
    test_rows = np.sort(perm[:n_test])
    train_rows = np.sort(perm[n_test:])
    return dataset.take_rows(train_rows), dataset.take_rows(test_rows)


def synthetic_classification(
    n_samples: int,
    n_features: int,
    *,
    n_informative: int | None = None,
    class_sep: float = 2.0,
    seed: int = 0,
) -> Dataset:
    """Two-class Gaussian dataset: the first ``n_informative`` columns carry
    class-dependent means, the rest are pure noise."""
    if n_informative is None:
        n_informative = max(n_features // 2, 1)
    if not 0 <= n_informative <= n_features:
        raise DataError("n_informative must lie in 0..n_features")
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n_samples)
    x = rng.normal(size=(n_samples, n_features))
    shift = np.where(y[:, None] == 1, class_sep / 2.0, -class_sep / 2.0)
    x[:, :n_informative] += shift
    return Dataset(x, y, 2)
