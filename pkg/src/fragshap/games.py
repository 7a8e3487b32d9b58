"""Synthetic games with explicit utility tables.

These back the axiom verifiers and the brute-force oracles: a game stores
one value per coalition, so every estimator can be checked against direct
table arithmetic.  All constructors honor the empty-coalition convention
``h(S, empty) = h(empty, F) = 0``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .grid import Coalition, bits_of


def _all_masks(n: int) -> range:
    return range(1 << n)


@dataclass(frozen=True)
class SyntheticGame:
    """A complete utility table over all 2^n * 2^m coalitions of an n x m grid."""

    n: int
    m: int
    table: dict[tuple[int, int], float] = field(repr=False)

    def __post_init__(self) -> None:
        expected = (1 << self.n) * (1 << self.m)
        if len(self.table) != expected:
            raise ValueError(f"table must contain exactly {expected} coalitions")
        for smask in _all_masks(self.n):
            for fmask in _all_masks(self.m):
                if (smask, fmask) not in self.table:
                    raise ValueError(f"missing coalition ({smask:b}, {fmask:b})")
                if (smask == 0 or fmask == 0) and self.table[(smask, fmask)] != 0.0:
                    raise ValueError("empty-sided coalitions must score 0")

    def value(self, coalition: Coalition) -> float:
        return self.table[(coalition.samples, coalition.features)]

    __call__ = value

    def grand_value(self) -> float:
        return self.table[((1 << self.n) - 1, (1 << self.m) - 1)]


def _empty_zeroed(n: int, m: int, fill) -> dict[tuple[int, int], float]:
    table: dict[tuple[int, int], float] = {}
    for smask in _all_masks(n):
        for fmask in _all_masks(m):
            if smask == 0 or fmask == 0:
                table[(smask, fmask)] = 0.0
            else:
                table[(smask, fmask)] = float(fill(smask, fmask))
    return table


def random_game(n: int, m: int, seed: int | np.random.Generator = 0) -> SyntheticGame:
    """Uniform [0, 1] utility table with empty coalitions zeroed."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return SyntheticGame(n, m, _empty_zeroed(n, m, lambda s, f: rng.random()))


def constant_game(n: int, m: int, value: float) -> SyntheticGame:
    """``value`` on every coalition except the zeroed empty-sided ones."""
    return SyntheticGame(n, m, _empty_zeroed(n, m, lambda s, f: value))


def additive_game(block_values: np.ndarray) -> SyntheticGame:
    """h(S, F) = sum of block values over the S x F rectangle."""
    a = np.asarray(block_values, dtype=float)
    n, m = a.shape

    def fill(smask: int, fmask: int) -> float:
        rows = list(bits_of(smask))
        cols = list(bits_of(fmask))
        return float(a[np.ix_(rows, cols)].sum())

    return SyntheticGame(n, m, _empty_zeroed(n, m, fill))


def product_game(n: int, m: int) -> SyntheticGame:
    """h(S, F) = |S| * |F|; every block has unit value."""
    return SyntheticGame(
        n, m, _empty_zeroed(n, m, lambda s, f: s.bit_count() * f.bit_count())
    )


def linear_combination(
    alpha: float, g1: SyntheticGame, beta: float, g2: SyntheticGame
) -> SyntheticGame:
    """Pointwise alpha*g1 + beta*g2 over identically shaped games."""
    if (g1.n, g1.m) != (g2.n, g2.m):
        raise ValueError("games must share grid dimensions")
    table = {
        key: alpha * g1.table[key] + beta * g2.table[key] for key in g1.table
    }
    return SyntheticGame(g1.n, g1.m, table)


def permute_mask(mask: int, perm: Sequence[int]) -> int:
    """Apply an index permutation to the set a mask encodes."""
    out = 0
    for i in bits_of(mask):
        out |= 1 << perm[i]
    return out


def permuted_game(
    game: SyntheticGame, pi_rows: Sequence[int], pi_cols: Sequence[int]
) -> SyntheticGame:
    """The relabeled game h'(S, F) = h(pi_rows(S), pi_cols(F))."""
    table = {
        (smask, fmask): game.table[(permute_mask(smask, pi_rows), permute_mask(fmask, pi_cols))]
        for smask in _all_masks(game.n)
        for fmask in _all_masks(game.m)
    }
    return SyntheticGame(game.n, game.m, table)


def planted_dummy_game(
    n: int, m: int, i: int, j: int, constant: float, seed: int | np.random.Generator = 0
) -> SyntheticGame:
    """Random game in which block (i, j) has the same marginal ``constant``
    in every context.

    Coalitions not containing both i and j get independent uniform values;
    the rest are forced by h(S+i, F+j) = h(S, F+j) + h(S+i, F) - h(S, F) + c.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    ibit, jbit = 1 << i, 1 << j
    table: dict[tuple[int, int], float] = {}
    for smask in _all_masks(n):
        for fmask in _all_masks(m):
            if smask == 0 or fmask == 0:
                table[(smask, fmask)] = 0.0
            elif not (smask & ibit and fmask & jbit):
                table[(smask, fmask)] = float(rng.random())
    for smask in _all_masks(n):
        if smask & ibit:
            continue
        for fmask in _all_masks(m):
            if fmask & jbit:
                continue
            table[(smask | ibit, fmask | jbit)] = (
                table[(smask, fmask | jbit)]
                + table[(smask | ibit, fmask)]
                - table[(smask, fmask)]
                + constant
            )
    return SyntheticGame(n, m, table)
