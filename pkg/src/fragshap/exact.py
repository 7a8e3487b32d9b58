"""Ground-truth block values by full enumeration, plus executable verifiers.

The closed-form weights assign coalition (S, F) with |S|=s, |F|=f the mass

    p[s, f] = s!(n-s-1)!/n! * f!(m-f-1)!/m!

and the value of block (i, j) is the p-weighted sum of its four-term
marginals over all coalitions avoiding i and j.  Two independent forms of
the same quantity (a binomial-normalized subset sum and a full permutation
average) are provided for cross-checking, together with verifiers for the
weight recursion system and the four fairness axioms.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .games import (
    SyntheticGame,
    linear_combination,
    permuted_game,
    planted_dummy_game,
    random_game,
)
from .grid import (
    DEFAULT_ENUMERATION_CAP,
    BlockGrid,
    Coalition,
    UtilityFn,
    ValueGrid,
    enumerate_coalitions,
    marginal_contribution,
)

#: Grid sides beyond which full permutation enumeration is refused.
_MAX_PERMUTATION_SIDE = 6


@dataclass(frozen=True)
class WeightTable:
    """Closed-form coalition weights p[s, f] for an n x m game."""

    n: int
    m: int
    p: np.ndarray

    @classmethod
    def for_grid(cls, n: int, m: int) -> WeightTable:
        """Build the table in log space to stay finite well past n, m = 20."""
        if not (1 <= n <= 64 and 1 <= m <= 64):
            raise ValueError("grid sides must lie in 1..64")
        row = [
            math.lgamma(s + 1) + math.lgamma(n - s) - math.lgamma(n + 1)
            for s in range(n)
        ]
        col = [
            math.lgamma(f + 1) + math.lgamma(m - f) - math.lgamma(m + 1)
            for f in range(m)
        ]
        p = np.exp(np.add.outer(np.array(row), np.array(col)))
        p.setflags(write=False)
        return cls(n, m, p)

    def subset_weighted_total(self) -> float:
        """Sum of C(n-1,s) C(m-1,f) p[s,f]; exactly 1 for a valid table."""
        total = 0.0
        for s in range(self.n):
            for f in range(self.m):
                total += math.comb(self.n - 1, s) * math.comb(self.m - 1, f) * self.p[s, f]
        return total


def verify_weight_recursion(n: int, m: int, *, tol: float = 1e-12) -> dict:
    """Check the closed-form weights against the full recursion system.

    Four condition families are evaluated: the interior recursion, the two
    boundary recursions, the terminal normalization nm*p[n-1,m-1]=1, plus
    the redundant completeness equation.  Residuals are reported per family.
    """
    wt = WeightTable.for_grid(n, m)
    p = wt.p
    interior = 0.0
    for s in range(1, n):
        for f in range(1, m):
            lhs = s * f * p[s - 1, f - 1] + (n - s) * (m - f) * p[s, f]
            rhs = (n - s) * f * p[s, f - 1] + s * (m - f) * p[s - 1, f]
            interior = max(interior, abs(lhs - rhs))
    col_boundary = max(
        (abs((m - f) * p[0, f] - f * p[0, f - 1]) for f in range(1, m)), default=0.0
    )
    row_boundary = max(
        (abs((n - s) * p[s, 0] - s * p[s - 1, 0]) for s in range(1, n)), default=0.0
    )
    terminal = abs(n * m * p[n - 1, m - 1] - 1.0)
    completeness = abs(wt.subset_weighted_total() - 1.0)
    checks = [
        {"check": "interior_recursion", "max_residual": interior},
        {"check": "column_boundary", "max_residual": col_boundary},
        {"check": "row_boundary", "max_residual": row_boundary},
        {"check": "terminal_normalization", "max_residual": terminal},
        {"check": "completeness", "max_residual": completeness},
    ]
    for c in checks:
        c["pass"] = bool(c["max_residual"] < tol)
    worst = max(c["max_residual"] for c in checks)
    return {
        "n": n,
        "m": m,
        "tol": tol,
        "checks": checks,
        "max_residual": worst,
        "pass": bool(worst < tol),
    }


def exact_values(
    h: UtilityFn, grid: BlockGrid, *, cap: int = DEFAULT_ENUMERATION_CAP
) -> ValueGrid:
    """Block values by full coalition enumeration with closed-form weights."""
    n, m = grid.n, grid.m
    wt = WeightTable.for_grid(n, m)
    psi = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            total = 0.0
            for c in enumerate_coalitions(grid, i, j, cap=cap):
                total += wt.p[c.sample_count, c.feature_count] * marginal_contribution(
                    h, i, j, c
                )
            psi[i, j] = total
    return ValueGrid(psi, method="exact")


def exact_values_weighted_subsets(
    h: UtilityFn, grid: BlockGrid, *, cap: int = DEFAULT_ENUMERATION_CAP
) -> np.ndarray:
    """Alternate form: marginals normalized by binomial stratum sizes.

    psi_ij = (1/nm) * sum over (S,F) of M(S,F) / (C(n-1,|S|) C(m-1,|F|)).
    Kept independent of :func:`exact_values` as a cross-check path.
    """
    n, m = grid.n, grid.m
    psi = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            total = 0.0
            for c in enumerate_coalitions(grid, i, j, cap=cap):
                weight = math.comb(n - 1, c.sample_count) * math.comb(m - 1, c.feature_count)
                total += marginal_contribution(h, i, j, c) / weight
            psi[i, j] = total / (n * m)
    return psi


def exact_values_permutation_average(h: UtilityFn, grid: BlockGrid) -> np.ndarray:
    """Alternate form: average the four-term marginal over every pair of a
    row permutation and a column permutation, evaluating each term directly."""
    n, m = grid.n, grid.m
    if n > _MAX_PERMUTATION_SIDE or m > _MAX_PERMUTATION_SIDE:
        raise ValueError("full permutation enumeration is limited to small grids")
    psi = np.zeros((n, m))
    count = 0
    for pi_rows in itertools.permutations(range(n)):
        row_prefix = _prefix_masks(pi_rows)
        for pi_cols in itertools.permutations(range(m)):
            col_prefix = _prefix_masks(pi_cols)
            count += 1
            for i in range(n):
                for j in range(m):
                    s_mask = row_prefix[i]
                    f_mask = col_prefix[j]
                    psi[i, j] += (
                        h(Coalition(s_mask | 1 << i, f_mask | 1 << j))
                        + h(Coalition(s_mask, f_mask))
                        - h(Coalition(s_mask | 1 << i, f_mask))
                        - h(Coalition(s_mask, f_mask | 1 << j))
                    )
    return psi / count


def _prefix_masks(perm: Sequence[int]) -> list[int]:
    """For each element, the mask of elements preceding it in the permutation."""
    out = [0] * len(perm)
    mask = 0
    for x in perm:
        out[x] = mask
        mask |= 1 << x
    return out


def reduce_to_1d(values: ValueGrid | np.ndarray, axis: str) -> np.ndarray:
    """Collapse a value grid to per-sample ("cols") or per-feature ("rows")
    scores by summing the indicated axis away."""
    matrix = values.values if isinstance(values, ValueGrid) else np.asarray(values)
    if axis == "cols":
        return matrix.sum(axis=1)
    if axis == "rows":
        return matrix.sum(axis=0)
    raise ValueError("axis must be 'rows' or 'cols'")


PsiFn = Callable[[SyntheticGame], np.ndarray]


def exact_psi(game: SyntheticGame) -> np.ndarray:
    """Exact block values of a synthetic game, as a plain matrix."""
    return exact_values(game, BlockGrid.cells(game.n, game.m)).values


def verify_axioms(
    psi_fn: PsiFn,
    games: Sequence[SyntheticGame],
    tol: float = 1e-10,
    *,
    seed: int = 0,
) -> dict:
    """Check a value computation against the four fairness axioms.

    Linearity pairs up same-shaped games with random scalars; the dummy check
    plants a constant-marginal block in a fresh random game per shape;
    symmetry draws one random row/column relabeling per game; efficiency
    compares the value total with the grand-coalition utility.
    """
    rng = np.random.default_rng(seed)
    linearity = 0.0
    by_shape: dict[tuple[int, int], list[SyntheticGame]] = {}
    for g in games:
        by_shape.setdefault((g.n, g.m), []).append(g)
    for shaped in by_shape.values():
        for g1, g2 in zip(shaped[0::2], shaped[1::2]):
            alpha, beta = rng.uniform(-2.0, 2.0, size=2)
            combo = linear_combination(alpha, g1, beta, g2)
            resid = np.abs(psi_fn(combo) - alpha * psi_fn(g1) - beta * psi_fn(g2)).max()
            linearity = max(linearity, resid)

    dummy = 0.0
    for n, m in by_shape:
        i = int(rng.integers(n))
        j = int(rng.integers(m))
        c = float(rng.uniform(-1.0, 1.0))
        planted = planted_dummy_game(n, m, i, j, c, seed=rng)
        dummy = max(dummy, abs(psi_fn(planted)[i, j] - c))

    symmetry = 0.0
    efficiency = 0.0
    for g in games:
        pi_rows = tuple(int(x) for x in rng.permutation(g.n))
        pi_cols = tuple(int(x) for x in rng.permutation(g.m))
        psi = psi_fn(g)
        psi_perm = psi_fn(permuted_game(g, pi_rows, pi_cols))
        for i in range(g.n):
            for j in range(g.m):
                symmetry = max(
                    symmetry, abs(psi_perm[pi_rows[i], pi_cols[j]] - psi[i, j])
                )
        efficiency = max(efficiency, abs(psi.sum() - g.grand_value()))

    checks = [
        {"check": "linearity", "max_residual": linearity},
        {"check": "dummy", "max_residual": dummy},
        {"check": "symmetry", "max_residual": symmetry},
        {"check": "efficiency", "max_residual": efficiency},
    ]
    for c in checks:
        c["pass"] = bool(c["max_residual"] < tol)
    worst = max(c["max_residual"] for c in checks)
    return {
        "tol": tol,
        "games": len(games),
        "checks": checks,
        "max_residual": worst,
        "pass": bool(worst < tol),
    }


def random_verification_games(
    shapes: Sequence[tuple[int, int]], per_shape: int, seed: int = 0
) -> list[SyntheticGame]:
    """Uniform random games for the axiom verifier, ``per_shape`` of each shape."""
    rng = np.random.default_rng(seed)
    return [random_game(n, m, seed=rng) for n, m in shapes for _ in range(per_shape)]
