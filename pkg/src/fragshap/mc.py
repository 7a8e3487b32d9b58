"""Monte Carlo block values over sampled permutation pairs.

One permutation pair costs exactly n*m fresh utility evaluations: the
prefix-utility matrix u[a, b] = h(first a+1 rows, first b+1 columns) is
filled once, and every block marginal is a 2-D finite difference of u with
an implicit zero sentinel for empty prefixes.  Permutation k is derived
from (seed, k) alone, so worker scheduling never changes the output; the
running mean always folds marginal matrices in ordinal order.
"""

from __future__ import annotations

import itertools
import math
import sys
from collections import deque
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import BlockGrid, Coalition, UtilityFn, ValueGrid


@dataclass(frozen=True)
class PermutationPair:
    """A row permutation and a column permutation, reproducible from
    (master seed, ordinal) alone."""

    pi_rows: tuple[int, ...]
    pi_cols: tuple[int, ...]
    seed_index: int = 0

    @classmethod
    def generate(cls, master_seed: int, index: int, n: int, m: int) -> PermutationPair:
        rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))
        return cls(
            tuple(int(x) for x in rng.permutation(n)),
            tuple(int(x) for x in rng.permutation(m)),
            index,
        )


def permutation_marginals(h: UtilityFn, grid: BlockGrid, pair: PermutationPair) -> np.ndarray:
    """Marginal matrix of one permutation pair, indexed by group ids.

    Issues one utility evaluation per block; the remaining three terms of
    each four-term marginal are reused from earlier prefixes.
    """
    n, m = grid.n, grid.m
    u = np.empty((n, m))
    marginals = np.empty((n, m))
    row_mask = 0
    for a, i in enumerate(pair.pi_rows):
        row_mask |= 1 << i
        col_mask = 0
        for b, j in enumerate(pair.pi_cols):
            col_mask |= 1 << j
            u[a, b] = h(Coalition(row_mask, col_mask))
            left = u[a, b - 1] if b else 0.0
            up = u[a - 1, b] if a else 0.0
            diag = u[a - 1, b - 1] if a and b else 0.0
            marginals[i, j] = u[a, b] - left - up + diag
    return marginals


class RunningEstimate:
    """Incremental mean of per-permutation marginal matrices.

    ``history`` keeps the most recent L-infinity step sizes; the first
    update has no predecessor and records no step.
    """

    def __init__(self, shape: tuple[int, ...], window: int = 20) -> None:
        self.mean = np.zeros(shape)
        self.t = 0
        self.history: deque[float] = deque(maxlen=max(window, 1))

    def update(self, marginals: np.ndarray) -> None:
        self.t += 1
        step = (marginals - self.mean) / self.t
        self.mean = self.mean + step
        if self.t > 1:
            self.history.append(float(np.abs(step).max()))

    @property
    def last_step(self) -> float:
        return self.history[-1] if self.history else math.inf


def convergence_check(
    estimate: RunningEstimate, epsilon: float | None, window: int
) -> bool:
    """True iff the last ``window`` steps, relative to the current mean's
    L-infinity magnitude, all fell below ``epsilon``."""
    if window < 1:
        raise ValueError("window must be at least 1")
    if epsilon is None or len(estimate.history) < window:
        return False
    scale = float(np.abs(estimate.mean).max())
    if scale < 1e-12:
        scale = 1.0
    recent = list(estimate.history)[-window:]
    return all(step / scale < epsilon for step in recent)


def fold_permutation_stream(
    compute: Callable[[int], np.ndarray],
    shape: tuple[int, ...],
    *,
    budget: int,
    epsilon: float | None,
    window: int,
    workers: int = 1,
    progress: str | None = None,
) -> tuple[np.ndarray, int, bool]:
    """Average ``compute(0..budget-1)`` with early stopping.

    Results are always folded in ordinal order, so the output is identical
    for every worker count; workers only parallelize the computation.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    est = RunningEstimate(shape, window=window)

    def fold_one(marginals: np.ndarray) -> bool:
        est.update(marginals)
        if progress:
            print(
                f"[{progress}] permutation {est.t} max-step {est.last_step:.3e}",
                file=sys.stderr,
            )
        return convergence_check(est, epsilon, window)

    converged = False
    if workers <= 1:
        for k in range(budget):
            if fold_one(compute(k)):
                converged = True
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            start = 0
            while start < budget and not converged:
                stop = min(start + 2 * workers, budget)
                for marginals in pool.map(compute, range(start, stop)):
                    if fold_one(marginals):
                        converged = True
                        break
                start = stop
    return est.mean, est.t, converged


def mc_values(
    h: UtilityFn,
    grid: BlockGrid,
    *,
    budget: int = 500,
    epsilon: float | None = 1e-3,
    window: int = 20,
    seed: int = 0,
    workers: int = 1,
    progress: bool = False,
) -> ValueGrid:
    """Block values averaged over randomly sampled permutation pairs.

    Stops at convergence or after ``budget`` pairs; running out of budget
    returns the best estimate with ``converged=False``.
    """
    n, m = grid.n, grid.m

    def compute(k: int) -> np.ndarray:
        return permutation_marginals(h, grid, PermutationPair.generate(seed, k, n, m))

    mean, used, converged = fold_permutation_stream(
        compute,
        (n, m),
        budget=budget,
        epsilon=epsilon,
        window=window,
        workers=workers,
        progress="mc" if progress else None,
    )
    return ValueGrid(mean, method="mc", permutations_used=used, seed=seed, converged=converged)


def all_permutation_pairs(n: int, m: int) -> Iterable[PermutationPair]:
    """Every pair of a row and a column permutation, in lexicographic order."""
    for k, (pr, pc) in enumerate(
        itertools.product(
            itertools.permutations(range(n)), itertools.permutations(range(m))
        )
    ):
        yield PermutationPair(pr, pc, k)


def exhaustive_mc_values(h: UtilityFn, grid: BlockGrid) -> ValueGrid:
    """Fold the full n!*m! permutation-pair population through the same
    update rule; the result equals the exact values."""
    n, m = grid.n, grid.m
    if n > 6 or m > 6:
        raise ValueError("exhaustive permutation folding is limited to small grids")
    est = RunningEstimate((n, m))
    for pair in all_permutation_pairs(n, m):
        est.update(permutation_marginals(h, grid, pair))
    return ValueGrid(
        est.mean, method="mc", permutations_used=est.t, seed=None, converged=True
    )
