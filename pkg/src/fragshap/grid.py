"""Domain types for the two-dimensional cooperative game over data blocks.

A data matrix is partitioned into ``n`` sample groups and ``m`` feature
groups.  The resulting grid of blocks is the ground set of a cooperative
game whose coalitions are pairs (sample-group subset, feature-group subset)
and whose utility is the performance of a model trained on the sub-matrix a
coalition selects.  Everything in this module is immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass

import numpy as np

#: Group indices are stored in fixed-width bit sets; one machine word each.
MAX_GROUPS = 64

#: Default limit on (n-1)+(m-1) free bits for full coalition enumeration.
DEFAULT_ENUMERATION_CAP = 24

VALUE_METHODS = ("exact", "mc", "knn", "baseline1d")


class PartitionError(ValueError):
    """A grid partition is malformed (overlap, gap, or empty group)."""


class EnumerationCapError(ValueError):
    """Full coalition enumeration would be infeasibly large."""


def mask_of(indices: Iterable[int]) -> int:
    """Pack group indices into a bit mask."""
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def bits_of(mask: int) -> tuple[int, ...]:
    """Unpack a bit mask into ascending group indices."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True, slots=True)
class Coalition:
    """A pair (S, F) of sample-group and feature-group subsets.

    Subsets are stored as bit masks, so equality and hashing are O(1) and
    independent of insertion order.
    """

    samples: int = 0
    features: int = 0

    @classmethod
    def of(cls, samples: Iterable[int] = (), features: Iterable[int] = ()) -> Coalition:
        return cls(mask_of(samples), mask_of(features))

    @property
    def sample_indices(self) -> tuple[int, ...]:
        return bits_of(self.samples)

    @property
    def feature_indices(self) -> tuple[int, ...]:
        return bits_of(self.features)

    @property
    def sample_count(self) -> int:
        return self.samples.bit_count()

    @property
    def feature_count(self) -> int:
        return self.features.bit_count()

    def has_sample(self, i: int) -> bool:
        return bool(self.samples >> i & 1)

    def has_feature(self, j: int) -> bool:
        return bool(self.features >> j & 1)

    def with_sample(self, i: int) -> Coalition:
        return Coalition(self.samples | 1 << i, self.features)

    def with_feature(self, j: int) -> Coalition:
        return Coalition(self.samples, self.features | 1 << j)

    @property
    def is_empty_sided(self) -> bool:
        """True when either side is empty; such coalitions score 0."""
        return self.samples == 0 or self.features == 0


#: Utility evaluators map a coalition to a real score.
UtilityFn = Callable[[Coalition], float]


def _validate_partition(groups: tuple[tuple[int, ...], ...], what: str) -> int:
    if not groups:
        raise PartitionError(f"at least one {what} group is required")
    if len(groups) > MAX_GROUPS:
        raise PartitionError(f"at most {MAX_GROUPS} {what} groups are supported")
    seen: set[int] = set()
    total = 0
    for g in groups:
        if not g:
            raise PartitionError(f"empty {what} group")
        for raw in g:
            if raw < 0 or raw in seen:
                raise PartitionError(f"{what} index {raw} repeated or negative")
            seen.add(raw)
        total += len(g)
    if seen != set(range(total)):
        raise PartitionError(f"{what} groups must cover raw indices 0..{total - 1} exactly")
    return total


@dataclass(frozen=True)
class BlockGrid:
    """Partition of a data matrix into sample groups x feature groups.

    ``row_members[i]`` lists the raw sample indices of group ``i``; likewise
    ``col_members[j]`` for features.  Groups are disjoint, non-empty, and
    jointly cover raw indices ``0..total-1``.
    """

    row_members: tuple[tuple[int, ...], ...]
    col_members: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(g) for g in self.row_members)
        cols = tuple(tuple(g) for g in self.col_members)
        object.__setattr__(self, "row_members", rows)
        object.__setattr__(self, "col_members", cols)
        _validate_partition(rows, "sample")
        _validate_partition(cols, "feature")

    @classmethod
    def cells(cls, n_rows: int, n_cols: int) -> BlockGrid:
        """Singleton partition: every raw sample/feature is its own group."""
        return cls(
            tuple((i,) for i in range(n_rows)),
            tuple((j,) for j in range(n_cols)),
        )

    @classmethod
    def from_groups(cls, row_groups: Iterable[Iterable[int]], col_groups: Iterable[Iterable[int]]) -> BlockGrid:
        return cls(
            tuple(tuple(g) for g in row_groups),
            tuple(tuple(g) for g in col_groups),
        )

    @property
    def n(self) -> int:
        return len(self.row_members)

    @property
    def m(self) -> int:
        return len(self.col_members)

    @property
    def total_rows(self) -> int:
        return sum(len(g) for g in self.row_members)

    @property
    def total_cols(self) -> int:
        return sum(len(g) for g in self.col_members)

    def full_coalition(self) -> Coalition:
        return Coalition((1 << self.n) - 1, (1 << self.m) - 1)

    def raw_rows(self, samples_mask: int) -> np.ndarray:
        """Raw sample indices selected by a sample-group mask, ascending."""
        out: list[int] = []
        for i in bits_of(samples_mask):
            out.extend(self.row_members[i])
        return np.array(sorted(out), dtype=np.intp)

    def raw_cols(self, features_mask: int) -> np.ndarray:
        out: list[int] = []
        for j in bits_of(features_mask):
            out.extend(self.col_members[j])
        return np.array(sorted(out), dtype=np.intp)


@dataclass(frozen=True)
class ValueGrid:
    """An n x m matrix of block scores plus estimator metadata."""

    values: np.ndarray
    method: str
    permutations_used: int = 0
    seed: int | None = None
    converged: bool = True

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.method not in VALUE_METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "exact" and (self.permutations_used != 0 or not self.converged):
            raise ValueError("exact values use no permutations and are always converged")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


def marginal_contribution(h: UtilityFn, i: int, j: int, coalition: Coalition) -> float:
    """Four-term counterfactual of block (i, j) against coalition (S, F).

    Returns ``h(S+i, F+j) + h(S, F) - h(S+i, F) - h(S, F+j)``: the change
    attributable to the block itself, beyond its row and column extensions.
    """
    if coalition.has_sample(i):
        raise ValueError(f"sample group {i} is already in the coalition")
    if coalition.has_feature(j):
        raise ValueError(f"feature group {j} is already in the coalition")
    with_i = coalition.with_sample(i)
    with_j = coalition.with_feature(j)
    with_ij = with_i.with_feature(j)
    return h(with_ij) + h(coalition) - h(with_i) - h(with_j)


def enumerate_coalitions(
    grid: BlockGrid,
    exclude_i: int,
    exclude_j: int,
    *,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Iterator[Coalition]:
    """Yield every (S, F) with S avoiding row ``exclude_i`` and F avoiding
    column ``exclude_j``, exactly once, grouped by (|S|, |F|).

    Refuses grids whose free bit count ``(n-1)+(m-1)`` exceeds ``cap``.
    """
    n, m = grid.n, grid.m
    if not 0 <= exclude_i < n:
        raise ValueError(f"row index {exclude_i} out of range")
    if not 0 <= exclude_j < m:
        raise ValueError(f"column index {exclude_j} out of range")
    free_bits = (n - 1) + (m - 1)
    if free_bits > cap:
        raise EnumerationCapError(
            f"enumeration over {free_bits} free bits exceeds the cap of {cap}"
        )
    other_rows = [i for i in range(n) if i != exclude_i]
    other_cols = [j for j in range(m) if j != exclude_j]
    for s in range(n):
        row_subsets = [mask_of(c) for c in itertools.combinations(other_rows, s)]
        for f in range(m):
            for smask in row_subsets:
                for fcomb in itertools.combinations(other_cols, f):
                    yield Coalition(smask, mask_of(fcomb))
