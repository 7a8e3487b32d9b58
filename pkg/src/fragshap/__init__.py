"""Contribution scores for rectangular blocks of a training-data matrix.

The package values every block (down to single cells) of a data matrix as a
player of a two-dimensional cooperative game: the utility of a coalition of
sample groups and feature groups is the test performance of a model trained
on the sub-matrix they select.  Exact enumeration, Monte Carlo permutation
sampling, and a training-free K-nearest-neighbor surrogate all estimate the
same axiomatically unique value, and an experiment harness covers cell
removal, outlier localization, and block pricing.
"""

from .baseline1d import (
    FlattenedUtility,
    baseline_1d_values,
    direct_1d_shapley,
    permutation_shapley_1d,
)
from .dataset import DataError, Dataset, load_csv, split_dataset, synthetic_classification
from .exact import (
    WeightTable,
    exact_psi,
    exact_values,
    exact_values_permutation_average,
    exact_values_weighted_subsets,
    random_verification_games,
    reduce_to_1d,
    verify_axioms,
    verify_weight_recursion,
)
from .experiments import (
    BlockPerformanceTable,
    DetectionCurve,
    OutlierPlan,
    RemovalCurve,
    ablation_outlier_budget,
    block_value_vs_performance,
    detection_curve,
    inject_outliers,
    ranked_cells,
    recall_at,
    remove_cells,
    swap_value_outliers,
)
from .games import (
    SyntheticGame,
    additive_game,
    constant_game,
    linear_combination,
    permuted_game,
    planted_dummy_game,
    product_game,
    random_game,
)
from .grid import (
    BlockGrid,
    Coalition,
    EnumerationCapError,
    PartitionError,
    ValueGrid,
    enumerate_coalitions,
    marginal_contribution,
)
from .knn import KnnConfig, knn_2d_values, knn_sample_values
from .mc import (
    PermutationPair,
    RunningEstimate,
    convergence_check,
    exhaustive_mc_values,
    mc_values,
    permutation_marginals,
)
from .oracle import LearnerSpec, UtilityOracle

__version__ = "0.1.0"

__all__ = [
    "BlockGrid",
    "BlockPerformanceTable",
    "Coalition",
    "DataError",
    "Dataset",
    "DetectionCurve",
    "EnumerationCapError",
    "FlattenedUtility",
    "KnnConfig",
    "LearnerSpec",
    "OutlierPlan",
    "PartitionError",
    "PermutationPair",
    "RemovalCurve",
    "RunningEstimate",
    "SyntheticGame",
    "UtilityOracle",
    "ValueGrid",
    "WeightTable",
    "ablation_outlier_budget",
    "additive_game",
    "baseline_1d_values",
    "block_value_vs_performance",
    "constant_game",
    "convergence_check",
    "detection_curve",
    "direct_1d_shapley",
    "enumerate_coalitions",
    "exact_psi",
    "exact_values",
    "exact_values_permutation_average",
    "exact_values_weighted_subsets",
    "exhaustive_mc_values",
    "inject_outliers",
    "knn_2d_values",
    "knn_sample_values",
    "linear_combination",
    "load_csv",
    "marginal_contribution",
    "mc_values",
    "permutation_marginals",
    "permutation_shapley_1d",
    "permuted_game",
    "planted_dummy_game",
    "product_game",
    "random_game",
    "random_verification_games",
    "ranked_cells",
    "recall_at",
    "reduce_to_1d",
    "remove_cells",
    "split_dataset",
    "swap_value_outliers",
    "synthetic_classification",
    "verify_axioms",
    "verify_weight_recursion",
]
