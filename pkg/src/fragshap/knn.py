"""Training-free block values via a K-nearest-neighbor surrogate.

Per-sample values of the KNN utility admit an exact recursion over the
training points sorted by distance, so no model is ever trained.  Block
values follow by walking sampled feature-group permutations: each prefix
extension re-sorts once and reuses the previous prefix's sample values,
i.e. m value sweeps per permutation.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .grid import BlockGrid, ValueGrid
from .learners import standardize_apply, standardize_fit
from .mc import RunningEstimate, fold_permutation_stream


@dataclass(frozen=True)
class KnnConfig:
    """Surrogate settings: neighbor count, permutation budget, master seed.

    Distances are squared Euclidean on standardized columns.
    """

    k: int = 5
    feature_permutations: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.feature_permutations < 1:
            raise ValueError("feature_permutations must be at least 1")


def knn_sample_values(
    train: Dataset, test: Dataset, features: Sequence[int], cfg: KnnConfig
) -> np.ndarray:
    """Exact per-sample values of the KNN utility under a raw-column subset.

    For each test point, training samples are sorted by distance (ties
    resolve toward the lower raw index) and valued farthest-first:

        value[n-1] = match[n-1] * min(K, n) / (K * n)
        value[i]   = value[i+1] + (match[i] - match[i+1]) / K * min(K, i+1) / (i+1)

    where match is 1 when a sample's label equals the test label.  The
    min(K, n)/K factor in the base case keeps the closed form equal to the
    subset-enumeration value even when the training set is smaller than K.
    Values are averaged over test points; an empty feature set yields zeros.
    """
    n = train.n_rows
    if len(features) == 0:
        return np.zeros(n)
    cols = np.asarray(sorted(features), dtype=np.intp)
    x_train = train.features[:, cols]
    mu, sd = standardize_fit(x_train)
    x_train = standardize_apply(x_train, mu, sd)
    x_test = standardize_apply(test.features[:, cols], mu, sd)

    diff = x_test[:, None, :] - x_train[None, :, :]
    d2 = np.einsum("tnc,tnc->tn", diff, diff)
    order = np.argsort(d2, axis=1, kind="stable")
    match = (train.labels[order] == test.labels[:, None]).astype(float)

    k = cfg.k
    values_sorted = np.empty_like(match)
    values_sorted[:, n - 1] = match[:, n - 1] * (min(k, n) / (k * n))
    if n > 1:
        ranks = np.arange(1, n)
        coef = np.minimum(k, ranks) / (k * ranks)
        diffs = (match[:, :-1] - match[:, 1:]) * coef
        tails = np.cumsum(diffs[:, ::-1], axis=1)[:, ::-1]
        values_sorted[:, :-1] = values_sorted[:, n - 1 :] + tails
    phi = np.empty_like(match)
    np.put_along_axis(phi, order, values_sorted, axis=1)
    return phi.mean(axis=0)


def feature_permutation_marginals(
    train: Dataset,
    test: Dataset,
    grid: BlockGrid,
    cfg: KnnConfig,
    order: Sequence[int],
) -> np.ndarray:
    """Block increments of one feature-group permutation.

    Walks prefixes left to right; each step computes sample values at
    prefix+group and differences against the retained previous prefix.
    Row groups wider than one sample sum their members' differences.
    """
    n, m = grid.n, grid.m
    row_arrays = [np.asarray(g, dtype=np.intp) for g in grid.row_members]
    marginals = np.empty((n, m))
    prev = np.zeros(train.n_rows)
    cols: list[int] = []
    for g in order:
        cols.extend(grid.col_members[g])
        cur = knn_sample_values(train, test, cols, cfg)
        delta = cur - prev
        for gi, members in enumerate(row_arrays):
            marginals[gi, g] = delta[members].sum()
        prev = cur
    return marginals


def knn_2d_values(
    train: Dataset,
    test: Dataset,
    grid: BlockGrid,
    cfg: KnnConfig = KnnConfig(),
    *,
    epsilon: float | None = None,
    window: int = 20,
    workers: int = 1,
    exhaustive: bool = False,
    progress: bool = False,
) -> ValueGrid:
    """Block values averaged over feature-group permutations.

    ``exhaustive`` folds all m! permutations (small m only); otherwise
    permutations are sampled from the config seed up to the budget, with
    the same convergence rule and worker contract as the Monte Carlo engine.
    """
    if grid.total_rows != train.n_rows or grid.total_cols != train.n_cols:
        raise ValueError("grid does not match the training data dimensions")
    n, m = grid.n, grid.m

    if exhaustive:
        if m > 8:
            raise ValueError("exhaustive feature permutations are limited to m <= 8")
        est = RunningEstimate((n, m))
        for order in itertools.permutations(range(m)):
            est.update(feature_permutation_marginals(train, test, grid, cfg, order))
        return ValueGrid(
            est.mean, method="knn", permutations_used=est.t, seed=cfg.seed, converged=True
        )

    def compute(k: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(k,)))
        order = [int(x) for x in rng.permutation(m)]
        return feature_permutation_marginals(train, test, grid, cfg, order)

    mean, used, converged = fold_permutation_stream(
        compute,
        (n, m),
        budget=cfg.feature_permutations,
        epsilon=epsilon,
        window=window,
        workers=workers,
        progress="knn" if progress else None,
    )
    return ValueGrid(
        mean, method="knn", permutations_used=used, seed=cfg.seed, converged=converged
    )
