"""Experiment harness: cell removal, outlier injection, detection curves,
and block-value vs. standalone-performance tables.

Every experiment is a pure function of (dataset, config, seed), so reruns
are bitwise identical.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dataset import Dataset
from .grid import BlockGrid, ValueGrid
from .knn import KnnConfig, knn_2d_values
from .oracle import LearnerSpec, evaluate_learner

REMOVAL_ORDERS = ("ascending", "descending", "random")


@dataclass(frozen=True)
class RemovalCurve:
    """Test accuracies after each cumulative batch of cell removals,
    including the no-removal point at index 0."""

    order: str
    batch: int
    accuracies: tuple[float, ...]


@dataclass(frozen=True)
class OutlierPlan:
    """Where low-density values were injected: (sample, feature, injected,
    original) per corrupted cell."""

    budget_fraction: float
    density_quantile: float
    placements: tuple[tuple[int, int, float, float], ...]
    seed: int

    @property
    def cells(self) -> set[tuple[int, int]]:
        return {(s, f) for s, f, _, _ in self.placements}


@dataclass(frozen=True)
class DetectionCurve:
    """Cumulative recall of planted cells when inspecting cells in
    ascending value order."""

    inspected: tuple[int, ...]
    detected_fraction: tuple[float, ...]


def ranked_cells(values: ValueGrid | np.ndarray) -> list[tuple[int, int]]:
    """All cells sorted ascending by value; ties break by (sample, feature)."""
    matrix = values.values if isinstance(values, ValueGrid) else np.asarray(values)
    n, m = matrix.shape
    order = np.argsort(matrix.ravel(), kind="stable")
    return [(int(b) // m, int(b) % m) for b in order]


def removal_fill_value(original: np.ndarray, removed: np.ndarray, column: int) -> float:
    """Replacement for a removed cell: the mean of the not-yet-removed cells
    in its column, or the original full-column mean once none remain."""
    remaining = ~removed[:, column]
    source = original[remaining, column] if remaining.any() else original[:, column]
    return float(source.mean())


def remove_cells(
    train: Dataset,
    test: Dataset,
    ranked: Sequence[tuple[int, int]],
    *,
    batch: int,
    order: str = "ascending",
    learner: LearnerSpec = LearnerSpec(),
    seed: int = 0,
) -> RemovalCurve:
    """Remove cells in batches and retrain after each batch.

    ``ranked`` lists distinct cells ascending by value; ``order`` applies
    that ranking forward, reversed, or in a seeded random shuffle.  A
    removed cell is overwritten with the mean of the not-yet-removed cells
    in its column (the original full-column mean once a column is gone).
    """
    if order not in REMOVAL_ORDERS:
        raise ValueError(f"order must be one of {REMOVAL_ORDERS}")
    if len(set(ranked)) != len(ranked):
        raise ValueError("ranked cells must be distinct")
    if batch < 1:
        raise ValueError("batch must be at least 1")
    cells = list(ranked)
    if order == "descending":
        cells.reverse()
    elif order == "random":
        rng = np.random.default_rng(seed)
        cells = [cells[i] for i in rng.permutation(len(cells))]

    original = train.features
    x = original.copy()
    removed = np.zeros(original.shape, dtype=bool)

    def score() -> float:
        return evaluate_learner(
            learner, x, train.labels, test.features, test.labels, train.class_count
        )

    accuracies = [score()]
    for start in range(0, len(cells), batch):
        chunk = cells[start : start + batch]
        for r, c in chunk:
            removed[r, c] = True
        for r, c in chunk:
            x[r, c] = removal_fill_value(original, removed, c)
        accuracies.append(score())
    return RemovalCurve(order, batch, tuple(accuracies))


def column_density(column: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Gaussian kernel density of a 1-D sample at ``points``, with Scott
    bandwidth sd * len(column)**(-1/5)."""
    sd = column.std(ddof=1)
    bandwidth = sd * len(column) ** (-0.2)
    z = (np.atleast_1d(points)[:, None] - column[None, :]) / bandwidth
    kernel = np.exp(-0.5 * z * z).sum(axis=1)
    return kernel / (len(column) * bandwidth * math.sqrt(2.0 * math.pi))


def inject_outliers(
    train: Dataset,
    *,
    budget_fraction: float = 0.02,
    density_quantile: float = 0.05,
    seed: int = 0,
    budget_cells: int | None = None,
) -> tuple[Dataset, OutlierPlan]:
    """Overwrite randomly chosen cells with low-density values.

    Per chosen cell, a kernel density estimate is fit on its (original)
    column; the threshold is the ``density_quantile`` quantile of the fitted
    densities at the observed points, and values are rejection-sampled from
    a uniform envelope [min-3sd, max+3sd] until their density falls below
    it.  Constant columns are skipped with a warning.
    """
    n_cells = train.n_rows * train.n_cols
    count = budget_cells if budget_cells is not None else round(budget_fraction * n_cells)
    if count == 0:
        plan = OutlierPlan(budget_fraction, density_quantile, (), seed)
        return train.replace_features(train.features.copy()), plan
    rng = np.random.default_rng(seed)
    flat = rng.choice(n_cells, size=count, replace=False)
    x = train.features.copy()
    thresholds: dict[int, float] = {}
    envelopes: dict[int, tuple[float, float]] = {}
    placements: list[tuple[int, int, float, float]] = []
    for b in sorted(int(v) for v in flat):
        r, c = divmod(b, train.n_cols)
        column = train.features[:, c]
        sd = column.std(ddof=1)
        if sd == 0.0:
            warnings.warn(f"column {c} is constant; skipping outlier injection there")
            continue
        if c not in thresholds:
            thresholds[c] = float(
                np.quantile(column_density(column, column), density_quantile)
            )
            envelopes[c] = (column.min() - 3.0 * sd, column.max() + 3.0 * sd)
        lo, hi = envelopes[c]
        for _ in range(10_000):
            candidate = float(rng.uniform(lo, hi))
            if column_density(column, np.array([candidate]))[0] < thresholds[c]:
                break
        else:
            raise RuntimeError(f"rejection sampling failed for column {c}")
        placements.append((r, c, candidate, float(x[r, c])))
        x[r, c] = candidate
    plan = OutlierPlan(budget_fraction, density_quantile, tuple(placements), seed)
    return train.replace_features(x), plan


def swap_value_outliers(
    train: Dataset,
    feature: int,
    value_pairs: Sequence[tuple[float, float]],
    count: int,
    seed: int = 0,
) -> tuple[Dataset, OutlierPlan]:
    """Typo-style corruption: swap explicit value pairs (e.g. 17 <-> 71) on
    one feature column for ``count`` randomly chosen matching cells."""
    rng = np.random.default_rng(seed)
    swap = {}
    for a, b in value_pairs:
        swap[a] = b
        swap[b] = a
    column = train.features[:, feature]
    candidates = np.flatnonzero(np.isin(column, list(swap)))
    if len(candidates) < count:
        raise ValueError(
            f"only {len(candidates)} cells match the swap values, need {count}"
        )
    chosen = rng.choice(candidates, size=count, replace=False)
    x = train.features.copy()
    placements = []
    for r in sorted(int(v) for v in chosen):
        original = float(x[r, feature])
        x[r, feature] = swap[original]
        placements.append((r, feature, float(x[r, feature]), original))
    n_cells = train.n_rows * train.n_cols
    plan = OutlierPlan(count / n_cells, 0.0, tuple(placements), seed)
    return train.replace_features(x), plan


def detection_curve(values: ValueGrid | np.ndarray, plan: OutlierPlan) -> DetectionCurve:
    """Cumulative recall of planted cells along the ascending-value ranking."""
    matrix = values.values if isinstance(values, ValueGrid) else np.asarray(values)
    n, m = matrix.shape
    planted = plan.cells
    total = n * m
    inspected = tuple(range(1, total + 1))
    if not planted:
        return DetectionCurve(inspected, (1.0,) * total)
    hits = np.zeros(total)
    for pos, (r, c) in enumerate(ranked_cells(matrix)):
        hits[pos] = (r, c) in planted
    recall = np.cumsum(hits) / len(planted)
    return DetectionCurve(inspected, tuple(float(v) for v in recall))


def recall_at(curve: DetectionCurve, inspected_fraction: float) -> float:
    """Recall after inspecting the given fraction of all cells."""
    total = len(curve.inspected)
    k = int(math.floor(inspected_fraction * total))
    if k < 1:
        return 0.0
    return curve.detected_fraction[min(k, total) - 1]


@dataclass(frozen=True)
class BlockPerformance:
    block: tuple[int, int]
    value: float
    accuracy: float


@dataclass(frozen=True)
class BlockPerformanceTable:
    rows: tuple[BlockPerformance, ...]
    spearman: float


def block_value_vs_performance(
    train: Dataset,
    test: Dataset,
    grid: BlockGrid,
    values: ValueGrid,
    learner: LearnerSpec = LearnerSpec(),
) -> BlockPerformanceTable:
    """Pair each block's value with the test accuracy of a learner trained
    on that block alone, and report their Spearman rank correlation."""
    rows = []
    for i in range(grid.n):
        r = np.asarray(grid.row_members[i], dtype=np.intp)
        for j in range(grid.m):
            c = np.asarray(grid.col_members[j], dtype=np.intp)
            acc = evaluate_learner(
                learner,
                train.features[np.ix_(r, c)],
                train.labels[r],
                test.features[:, c],
                test.labels,
                train.class_count,
            )
            rows.append(BlockPerformance((i, j), float(values.values[i, j]), acc))
    if len(rows) > 1:
        with warnings.catch_warnings():
            # constant columns make the coefficient undefined; report 0
            warnings.simplefilter("ignore", stats.ConstantInputWarning)
            rho = stats.spearmanr(
                [b.value for b in rows], [b.accuracy for b in rows]
            ).statistic
        rho = float(rho) if np.isfinite(rho) else 0.0
    else:
        rho = 0.0
    return BlockPerformanceTable(tuple(rows), rho)


def ablation_outlier_budget(
    train: Dataset,
    test: Dataset,
    budgets: Sequence[float],
    cfg: KnnConfig = KnnConfig(),
    *,
    seed: int = 0,
) -> dict[float, DetectionCurve]:
    """Detection curves of the KNN-surrogate values over a range of
    injection budgets, one inject-value-detect pass per budget."""
    curves: dict[float, DetectionCurve] = {}
    for budget in budgets:
        corrupted, plan = inject_outliers(train, budget_fraction=budget, seed=seed)
        grid = BlockGrid.cells(corrupted.n_rows, corrupted.n_cols)
        values = knn_2d_values(corrupted, test, grid, cfg)
        curves[budget] = detection_curve(values, plan)
    return curves
