import numpy as np
import pytest

import fragshap.knn as knn_module
from fragshap import BlockGrid, Dataset, KnnConfig, knn_2d_values, knn_sample_values
from oracles import brute_knn_shapley, brute_shapley_1d


def random_dataset(rng, n, d, t):
    train = Dataset(rng.normal(size=(n, d)), rng.integers(0, 2, n), 2)
    test = Dataset(rng.normal(size=(t, d)), rng.integers(0, 2, t), 2)
    return train, test


class TestSampleValues:
    def test_matches_brute_force_shapley(self):
        rng = np.random.default_rng(1)
        for _ in range(8):
            n = int(rng.integers(1, 8))
            d = int(rng.integers(1, 4))
            k = int(rng.choice([1, 3, 5]))
            train, test = random_dataset(rng, n, d, int(rng.integers(1, 4)))
            got = knn_sample_values(train, test, range(d), KnnConfig(k=k))
            want = brute_knn_shapley(
                train.features, train.labels, test.features, test.labels, k
            )
            assert np.abs(got - want).max() < 1e-10

    def test_all_matching_labels_share_the_credit(self):
        rng = np.random.default_rng(2)
        n = 6
        train = Dataset(rng.normal(size=(n, 2)), np.ones(n, dtype=int), 2)
        test = Dataset(rng.normal(size=(3, 2)), np.ones(3, dtype=int), 2)
        for k in (1, 3, 5):
            phi = knn_sample_values(train, test, [0, 1], KnnConfig(k=k))
            assert np.allclose(phi, 1.0 / n, atol=1e-12)
        # with fewer samples than neighbors the utility saturates below 1
        # and the even split scales accordingly: min(K, n) / (K * n)
        phi = knn_sample_values(train, test, [0, 1], KnnConfig(k=7))
        assert np.allclose(phi, 6.0 / (7.0 * n), atol=1e-12)

    def test_nearest_match_then_two_misses_with_1nn(self):
        # one test point at the origin; train at distances 1 < 2 < 3 with
        # labels (match, miss, miss): only the nearest sample matters
        train = Dataset(np.array([[1.0], [2.0], [3.0]]), np.array([0, 1, 1]), 2)
        test = Dataset(np.array([[0.0]]), np.array([0]), 2)
        phi = knn_sample_values(train, test, [0], KnnConfig(k=1))
        want = brute_knn_shapley(
            train.features, train.labels, test.features, test.labels, 1
        )
        assert np.abs(phi - want).max() < 1e-12
        assert np.allclose(phi, [1.0, 0.0, 0.0], atol=1e-12)

    def test_distance_ties_prefer_lower_raw_index(self):
        # both training points sit at distance 1; the recursion must treat
        # row 0 as nearer, making the result deterministic
        train = Dataset(np.array([[1.0], [-1.0]]), np.array([1, 0]), 2)
        test = Dataset(np.array([[0.0]]), np.array([1]), 2)
        phi = knn_sample_values(train, test, [0], KnnConfig(k=1))
        again = knn_sample_values(train, test, [0], KnnConfig(k=1))
        assert np.array_equal(phi, again)
        want = brute_knn_shapley(
            train.features, train.labels, test.features, test.labels, 1
        )
        assert np.abs(phi - want).max() < 1e-12

    def test_empty_feature_set_scores_zero(self):
        rng = np.random.default_rng(3)
        train, test = random_dataset(rng, 5, 3, 2)
        assert np.array_equal(
            knn_sample_values(train, test, [], KnnConfig()), np.zeros(5)
        )

    def test_efficiency_of_sample_values(self):
        rng = np.random.default_rng(4)
        train, test = random_dataset(rng, 7, 3, 3)
        for k in (1, 3):
            cfg = KnnConfig(k=k)
            phi = knn_sample_values(train, test, [0, 1, 2], cfg)
            # sums to the utility of the full training set (empty set is 0)
            mu, sd = train.features.mean(0), train.features.std(0)
            a = (train.features - mu) / sd
            b = (test.features - mu) / sd
            total = 0.0
            for t in range(test.n_rows):
                d = ((a - b[t]) ** 2).sum(axis=1)
                order = np.argsort(d, kind="stable")[: min(k, train.n_rows)]
                total += (train.labels[order] == test.labels[t]).sum() / k
            assert phi.sum() == pytest.approx(total / test.n_rows, abs=1e-10)


class TestBlockValues:
    def test_single_feature_group_equals_sample_values(self):
        rng = np.random.default_rng(5)
        train, test = random_dataset(rng, 6, 2, 3)
        grid = BlockGrid.from_groups([[i] for i in range(6)], [[0, 1]])
        cfg = KnnConfig(k=3)
        values = knn_2d_values(train, test, grid, cfg, exhaustive=True)
        phi = knn_sample_values(train, test, [0, 1], cfg)
        assert np.allclose(values.values[:, 0], phi, atol=1e-12)
        assert values.permutations_used == 1

    def test_row_sums_telescope_to_full_feature_values(self):
        rng = np.random.default_rng(6)
        train, test = random_dataset(rng, 5, 3, 2)
        grid = BlockGrid.cells(5, 3)
        cfg = KnnConfig(k=3)
        values = knn_2d_values(train, test, grid, cfg, exhaustive=True)
        phi_full = knn_sample_values(train, test, [0, 1, 2], cfg)
        assert np.abs(values.values.sum(axis=1) - phi_full).max() < 1e-10

    def test_column_sums_match_feature_game_shapley(self):
        rng = np.random.default_rng(7)
        train, test = random_dataset(rng, 6, 2, 3)
        grid = BlockGrid.cells(6, 2)
        cfg = KnnConfig(k=3)
        values = knn_2d_values(train, test, grid, cfg, exhaustive=True)

        def feature_game(mask):
            cols = [j for j in range(2) if mask >> j & 1]
            return float(knn_sample_values(train, test, cols, cfg).sum())

        want = brute_shapley_1d(feature_game, 2)
        assert np.abs(values.values.sum(axis=0) - want).max() < 1e-10

    def test_wide_row_groups_add_member_values(self):
        rng = np.random.default_rng(8)
        train, test = random_dataset(rng, 6, 3, 2)
        cfg = KnnConfig(k=2)
        fine = knn_2d_values(train, test, BlockGrid.cells(6, 3), cfg, exhaustive=True)
        coarse_grid = BlockGrid.from_groups([[0, 1], [2, 3, 4], [5]], [[0], [1], [2]])
        coarse = knn_2d_values(train, test, coarse_grid, cfg, exhaustive=True)
        assert np.allclose(
            coarse.values[0], fine.values[0] + fine.values[1], atol=1e-12
        )
        assert np.allclose(
            coarse.values[1], fine.values[2:5].sum(axis=0), atol=1e-12
        )
        assert np.allclose(coarse.values[2], fine.values[5], atol=1e-12)

    def test_sampled_mode_is_deterministic_across_workers(self):
        rng = np.random.default_rng(9)
        train, test = random_dataset(rng, 8, 4, 3)
        grid = BlockGrid.cells(8, 4)
        cfg = KnnConfig(k=3, feature_permutations=20, seed=42)
        a = knn_2d_values(train, test, grid, cfg, workers=1)
        b = knn_2d_values(train, test, grid, cfg, workers=4)
        assert np.array_equal(a.values, b.values)
        c = knn_2d_values(train, test, grid, KnnConfig(k=3, feature_permutations=20, seed=43))
        assert not np.array_equal(a.values, c.values)

    def test_one_value_sweep_per_feature_group(self, monkeypatch):
        rng = np.random.default_rng(10)
        train, test = random_dataset(rng, 5, 4, 2)
        grid = BlockGrid.cells(5, 4)
        calls = {"n": 0}
        real = knn_module.knn_sample_values

        def counting(*args, **kwargs):
            calls["n"] += 1
            return real(*args, **kwargs)

        monkeypatch.setattr(knn_module, "knn_sample_values", counting)
        knn_2d_values(train, test, grid, KnnConfig(k=2, feature_permutations=1))
        assert calls["n"] == grid.m

    def test_grid_must_match_data(self):
        rng = np.random.default_rng(11)
        train, test = random_dataset(rng, 4, 3, 2)
        with pytest.raises(ValueError):
            knn_2d_values(train, test, BlockGrid.cells(5, 3), KnnConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            KnnConfig(k=0)
        with pytest.raises(ValueError):
            KnnConfig(feature_permutations=0)
