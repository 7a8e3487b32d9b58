import numpy as np
import pytest

from fragshap import (
    BlockGrid,
    Coalition,
    SyntheticGame,
    additive_game,
    enumerate_coalitions,
    marginal_contribution,
    permuted_game,
    planted_dummy_game,
    product_game,
    random_game,
)


def test_table_must_be_complete():
    with pytest.raises(ValueError):
        SyntheticGame(1, 1, {(0, 0): 0.0})


def test_empty_sided_coalitions_must_be_zero():
    table = {(s, f): 1.0 for s in range(2) for f in range(2)}
    with pytest.raises(ValueError):
        SyntheticGame(1, 1, table)


def test_random_game_bounds_and_determinism():
    g1 = random_game(2, 3, seed=4)
    g2 = random_game(2, 3, seed=4)
    assert g1.table == g2.table
    assert all(0.0 <= v <= 1.0 for v in g1.table.values())
    assert g1.value(Coalition.of([], [0, 1])) == 0.0


def test_additive_game_values():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    g = additive_game(a)
    assert g.value(Coalition.of([0, 1], [0, 1])) == pytest.approx(10.0)
    assert g.value(Coalition.of([1], [0])) == pytest.approx(3.0)
    assert g.grand_value() == pytest.approx(10.0)


def test_product_game_counts():
    g = product_game(3, 2)
    assert g.value(Coalition.of([0, 2], [1])) == 2.0
    assert g.grand_value() == 6.0


def test_planted_dummy_marginal_is_constant_everywhere():
    g = planted_dummy_game(3, 3, 1, 2, constant=0.37, seed=8)
    grid = BlockGrid.cells(3, 3)
    for c in enumerate_coalitions(grid, 1, 2):
        assert marginal_contribution(g, 1, 2, c) == pytest.approx(0.37, abs=1e-12)


def test_permuted_game_relabeling():
    g = random_game(2, 2, seed=0)
    pg = permuted_game(g, [1, 0], [0, 1])
    # h'(S, F) = h(pi_rows(S), F)
    assert pg.value(Coalition.of([0], [0])) == g.value(Coalition.of([1], [0]))
    assert pg.grand_value() == g.grand_value()
    # identity permutation round-trips
    assert permuted_game(pg, [1, 0], [0, 1]).table == g.table
