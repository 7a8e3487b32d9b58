"""Flattened one-dimensional baseline and direct 1-D Shapley estimators.

The baseline treats all n*m blocks as players of a single game: a subset of
blocks materializes the rows that have at least one block present, imputes
every absent cell of those rows with the full-dataset column mean, trains
the learner on all columns, and scores on the held-out test set.  Values
come from permutation sampling and are unflattened back to an n x m grid.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from .dataset import Dataset
from .grid import BlockGrid, Coalition, UtilityFn, ValueGrid
from .mc import fold_permutation_stream
from .oracle import LearnerSpec, evaluate_learner

#: A set function over bitmask-encoded player subsets.
SetFn = Callable[[int], float]


def permutation_shapley_1d(
    u: SetFn,
    n_players: int,
    *,
    budget: int = 500,
    seed: int = 0,
    workers: int = 1,
    exhaustive: bool = False,
) -> tuple[np.ndarray, int, bool]:
    """Permutation-sampling Shapley values of a set function.

    Returns (values, permutations_used, exhausted_all).  ``exhaustive``
    folds every permutation of the players instead of sampling (small
    player counts only); per-permutation marginals telescope to
    u(full) - u(empty) by construction.
    """
    full = (1 << n_players) - 1

    def marginals_for(order: np.ndarray) -> np.ndarray:
        out = np.empty(n_players)
        prefix = 0
        for p in order:
            before = u(prefix)
            prefix |= 1 << int(p)
            out[p] = u(prefix) - before
        assert prefix == full
        return out

    if exhaustive:
        import itertools

        if n_players > 9:
            raise ValueError("exhaustive permutations are limited to 9 players")
        total = np.zeros(n_players)
        count = 0
        for order in itertools.permutations(range(n_players)):
            total += marginals_for(np.array(order))
            count += 1
        return total / count, count, True

    def compute(k: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        return marginals_for(rng.permutation(n_players))

    mean, used, _ = fold_permutation_stream(
        compute,
        (n_players,),
        budget=budget,
        epsilon=None,
        window=1,
        workers=workers,
    )
    return mean, used, False


class FlattenedUtility:
    """Set function over the n*m blocks of a grid, backed by train/test data.

    Block b = i*m + j in row-major order.  Rows with no block present are
    dropped; absent cells of participating rows are imputed with column
    means computed once on the full training matrix.  The empty set scores 0.
    """

    def __init__(
        self, train: Dataset, test: Dataset, grid: BlockGrid, learner: LearnerSpec
    ) -> None:
        if grid.total_rows != train.n_rows or grid.total_cols != train.n_cols:
            raise ValueError("grid does not match the training data dimensions")
        self.train = train
        self.test = test
        self.grid = grid
        self.learner = learner
        self.column_means = train.features.mean(axis=0)
        self._cache: dict[int, float] = {}
        self.n_players = grid.n * grid.m

    def __call__(self, mask: int) -> float:
        if mask == 0:
            return 0.0
        cached = self._cache.get(mask)
        if cached is not None:
            return cached
        m = self.grid.m
        row_groups = [i for i in range(self.grid.n) if (mask >> (i * m)) & ((1 << m) - 1)]
        rows = self.grid.raw_rows(sum(1 << i for i in row_groups))
        x = self.train.features[rows].copy()
        raw_of = {raw: pos for pos, raw in enumerate(rows)}
        for i in row_groups:
            member_pos = [raw_of[r] for r in self.grid.row_members[i]]
            for j in range(m):
                if mask >> (i * m + j) & 1:
                    continue
                for c in self.grid.col_members[j]:
                    x[member_pos, c] = self.column_means[c]
        score = evaluate_learner(
            self.learner,
            x,
            self.train.labels[rows],
            self.test.features,
            self.test.labels,
            self.train.class_count,
        )
        self._cache[mask] = score
        return score


def baseline_1d_values(
    train: Dataset,
    test: Dataset,
    grid: BlockGrid,
    learner: LearnerSpec = LearnerSpec(),
    *,
    budget: int = 500,
    seed: int = 0,
    workers: int = 1,
    exhaustive: bool = False,
) -> ValueGrid:
    """Flattened 1-D Shapley of all blocks, unflattened to an n x m grid."""
    u = FlattenedUtility(train, test, grid, learner)
    values, used, complete = permutation_shapley_1d(
        u, u.n_players, budget=budget, seed=seed, workers=workers, exhaustive=exhaustive
    )
    return ValueGrid(
        values.reshape(grid.n, grid.m),
        method="baseline1d",
        permutations_used=used,
        seed=seed,
        converged=complete,
    )


def direct_1d_shapley(
    h: UtilityFn,
    grid: BlockGrid,
    axis: str,
    *,
    budget: int = 500,
    seed: int = 0,
    exhaustive: bool = False,
) -> np.ndarray:
    """Permutation-sampling Shapley of the restricted game along one axis:
    g(S) = h(S, all features) for "samples", g(F) = h(all samples, F) for
    "features"."""
    full = grid.full_coalition()
    if axis == "samples":
        u: SetFn = lambda mask: h(Coalition(mask, full.features))
        players = grid.n
    elif axis == "features":
        u = lambda mask: h(Coalition(full.samples, mask))
        players = grid.m
    else:
        raise ValueError("axis must be 'samples' or 'features'")
    values, _, _ = permutation_shapley_1d(
        u, players, budget=budget, seed=seed, exhaustive=exhaustive
    )
    return values
