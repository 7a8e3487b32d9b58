"""Deterministic utility oracle: coalition -> test accuracy, with memoization.

The oracle materializes the sub-matrix a coalition selects (union of its
row groups x union of its column groups), trains an in-core learner, and
scores it on the held-out test set restricted to the same columns.
Coalitions with an empty side score exactly 0 by convention.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from . import learners
from .dataset import Dataset
from .grid import BlockGrid, Coalition

LEARNER_KINDS = ("knn_classifier", "logistic_regression", "majority_class")


@dataclass(frozen=True)
class LearnerSpec:
    """Which in-core learner backs the utility, and its budget."""

    kind: str = "knn_classifier"
    k: int = 5
    lr_steps: int = 200
    lr_rate: float = 0.1
    standardize: bool = True

    def __post_init__(self) -> None:
        if self.kind not in LEARNER_KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.lr_steps < 1:
            raise ValueError("lr_steps must be at least 1")


def evaluate_learner(
    spec: LearnerSpec,
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_test: np.ndarray,
    y_test: np.ndarray,
    class_count: int,
) -> float:
    """Train per ``spec`` and return plain test accuracy.

    Single-class training sets predict that class everywhere instead of
    raising, so estimators never have to special-case degenerate coalitions.
    """
    classes = np.unique(y_train)
    if classes.size == 1:
        preds = np.full(x_test.shape[0], classes[0], dtype=np.intp)
        return learners.accuracy(preds, y_test)
    if spec.standardize:
        mu, sd = learners.standardize_fit(x_train)
        x_train = learners.standardize_apply(x_train, mu, sd)
        x_test = learners.standardize_apply(x_test, mu, sd)
    if spec.kind == "knn_classifier":
        preds = learners.knn_predict(x_train, y_train, x_test, spec.k, class_count)
    elif spec.kind == "logistic_regression":
        preds = learners.logistic_regression_predict(
            x_train, y_train, x_test, class_count, spec.lr_steps, spec.lr_rate
        )
    else:
        preds = learners.majority_class_predict(y_train, x_test.shape[0], class_count)
    return learners.accuracy(preds, y_test)


class UtilityOracle:
    """Caching evaluator h(S, F) for one (train, test, grid, learner) binding.

    Scores are a pure function of the coalition, so concurrent duplicate
    computations of the same key are benign; the cache uses insert-if-absent
    semantics under a lock.
    """

    def __init__(
        self,
        train: Dataset,
        test: Dataset,
        grid: BlockGrid,
        learner: LearnerSpec = LearnerSpec(),
    ) -> None:
        if grid.total_rows != train.n_rows:
            raise ValueError(
                f"grid covers {grid.total_rows} samples but train has {train.n_rows}"
            )
        if grid.total_cols != train.n_cols:
            raise ValueError(
                f"grid covers {grid.total_cols} features but train has {train.n_cols}"
            )
        if test.n_cols != train.n_cols:
            raise ValueError("train and test feature counts differ")
        if test.class_count != train.class_count:
            raise ValueError("train and test class counts differ")
        self.train = train
        self.test = test
        self.grid = grid
        self.learner = learner
        self._cache: dict[tuple[int, int], float] = {}
        self._hits = 0
        self._misses = 0
        self._lock = threading.Lock()

    def evaluate(self, coalition: Coalition) -> float:
        if coalition.is_empty_sided:
            return 0.0
        key = (coalition.samples, coalition.features)
        with self._lock:
            if key in self._cache:
                self._hits += 1
                return self._cache[key]
            self._misses += 1
        rows = self.grid.raw_rows(coalition.samples)
        cols = self.grid.raw_cols(coalition.features)
        score = evaluate_learner(
            self.learner,
            self.train.features[np.ix_(rows, cols)],
            self.train.labels[rows],
            self.test.features[:, cols],
            self.test.labels,
            self.train.class_count,
        )
        with self._lock:
            self._cache.setdefault(key, score)
        return score

    __call__ = evaluate

    def cache_stats(self) -> tuple[int, int]:
        """(hits, misses) so far; misses equal actual learner trainings."""
        with self._lock:
            return self._hits, self._misses

    @property
    def evaluation_count(self) -> int:
        return self.cache_stats()[1]
