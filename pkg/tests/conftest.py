import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fragshap import BlockGrid, Dataset, LearnerSpec, UtilityOracle


@pytest.fixture
def separable_dataset() -> tuple[Dataset, Dataset]:
    """20 train / 8 test samples in 2 features, classes split by the sign of
    feature 0 with a wide margin."""
    rng = np.random.default_rng(11)
    signs = np.array([1.0] * 10 + [-1.0] * 10)
    x_train = np.column_stack(
        [signs * (1.0 + rng.random(20)), 0.05 * rng.standard_normal(20)]
    )
    y_train = (signs > 0).astype(int)
    test_signs = np.array([1.0, -1.0] * 4)
    x_test = np.column_stack(
        [test_signs * (1.0 + rng.random(8)), 0.05 * rng.standard_normal(8)]
    )
    y_test = (test_signs > 0).astype(int)
    return Dataset(x_train, y_train, 2), Dataset(x_test, y_test, 2)


@pytest.fixture
def toy_oracle() -> UtilityOracle:
    """A 6x6 dataset under a 3x3 grid of 2-wide groups; KNN learner."""
    rng = np.random.default_rng(5)
    x = rng.normal(size=(6, 6))
    y = np.array([0, 1, 0, 1, 0, 1])
    train = Dataset(x, y, 2)
    test = Dataset(rng.normal(size=(4, 6)), np.array([0, 1, 0, 1]), 2)
    grid = BlockGrid.from_groups(
        [[0, 1], [2, 3], [4, 5]], [[0, 1], [2, 3], [4, 5]]
    )
    return UtilityOracle(train, test, grid, LearnerSpec(kind="knn_classifier", k=1))
