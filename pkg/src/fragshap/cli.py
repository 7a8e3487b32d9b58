"""Command-line entry point binding datasets, partitions, engines, and
experiments into reproducible runs.

Every command writes its results, the fully resolved configuration, and a
timing file into the output directory, so any result is re-derivable from
its sidecar config.  Exit codes: 0 success, 2 validation error, 1 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .baseline1d import baseline_1d_values
from .dataset import DataError, Dataset, load_csv, split_dataset, synthetic_classification
from .exact import exact_psi, exact_values, random_verification_games, verify_axioms, verify_weight_recursion
from .experiments import (
    ablation_outlier_budget,
    block_value_vs_performance,
    detection_curve,
    inject_outliers,
    ranked_cells,
    remove_cells,
    swap_value_outliers,
)
from .grid import BlockGrid, PartitionError, ValueGrid
from .knn import KnnConfig, knn_2d_values
from .mc import mc_values
from .oracle import LEARNER_KINDS, LearnerSpec, UtilityOracle

SEED_ENV_VAR = "FRAGSHAP_SEED"


class CliError(ValueError):
    """Input validation failure; maps to exit code 2."""


def _float_repr(v: float) -> str:
    return repr(float(v))


def write_value_grid(outdir: Path, values: ValueGrid) -> None:
    lines = ["group," + ",".join(f"f{j}" for j in range(values.m))]
    for i in range(values.n):
        lines.append(f"s{i}," + ",".join(_float_repr(v) for v in values.values[i]))
    (outdir / "values.csv").write_text("\n".join(lines) + "\n")
    meta = {
        "method": values.method,
        "n": values.n,
        "m": values.m,
        "permutations_used": values.permutations_used,
        "seed": values.seed,
        "converged": values.converged,
    }
    write_json(outdir / "values.json", meta)


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_float_repr(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def load_value_grid(path: str) -> np.ndarray:
    try:
        rows = Path(path).read_text().strip().splitlines()
        return np.array([[float(v) for v in line.split(",")[1:]] for line in rows[1:]])
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read values file {path}: {exc}") from exc


def resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return 0


def load_datasets(args) -> tuple[Dataset, Dataset]:
    if not args.train:
        raise CliError("--train is required")
    train = load_csv(args.train, args.label_col, impute_mean=args.impute_mean)
    if args.test:
        test = load_csv(args.test, args.label_col, impute_mean=args.impute_mean)
        if test.n_cols != train.n_cols:
            raise CliError("train and test files have different feature counts")
        return train, test
    if args.test_frac is None:
        raise CliError("provide --test FILE or --test-frac FRACTION")
    return split_dataset(train, args.test_frac, resolve_seed(args))


def load_partition(args, train: Dataset) -> BlockGrid:
    spec = args.partition
    if spec == "cells":
        return BlockGrid.cells(train.n_rows, train.n_cols)
    try:
        payload = json.loads(Path(spec).read_text())
    except OSError as exc:
        raise CliError(f"cannot read partition file {spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"partition file {spec} is not valid JSON: {exc}") from exc
    if payload == "cells" or payload.get("cells"):
        return BlockGrid.cells(train.n_rows, train.n_cols)
    try:
        grid = BlockGrid.from_groups(payload["row_groups"], payload["col_groups"])
    except KeyError as exc:
        raise CliError(f"partition file {spec} needs row_groups and col_groups") from exc
    if grid.total_rows != train.n_rows or grid.total_cols != train.n_cols:
        raise CliError(
            f"partition covers {grid.total_rows}x{grid.total_cols} but data is "
            f"{train.n_rows}x{train.n_cols}"
        )
    return grid


def learner_from(args) -> LearnerSpec:
    return LearnerSpec(
        kind=args.learner,
        k=args.k,
        lr_steps=args.lr_steps,
        lr_rate=args.lr_rate,
        standardize=not args.no_standardize,
    )


def prepare_outdir(args) -> Path:
    if not args.out:
        raise CliError("--out directory is required")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def resolved_config(args) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    config["seed"] = resolve_seed(args)
    return config


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train", help="training CSV (header row required)")
    p.add_argument("--test", help="held-out test CSV")
    p.add_argument("--test-frac", type=float, help="split this fraction off --train instead")
    p.add_argument("--label-col", default="label", help="name of the label column")
    p.add_argument("--impute-mean", action="store_true", help="mean-fill non-numeric cells")
    p.add_argument("--partition", default="cells", help="partition JSON path, or 'cells'")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"master seed (falls back to ${SEED_ENV_VAR})")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=None, help="worker threads (default: all cores)")


def _add_learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--learner", choices=LEARNER_KINDS, default="knn_classifier")
    p.add_argument("--k", type=int, default=5, help="neighbor count for knn_classifier")
    p.add_argument("--lr-steps", type=int, default=200)
    p.add_argument("--lr-rate", type=float, default=0.1)
    p.add_argument("--no-standardize", action="store_true")


def _workers(args) -> int:
    return args.workers if args.workers else (os.cpu_count() or 1)


def cmd_value_exact(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    grid = load_partition(args, train)
    oracle = UtilityOracle(train, test, grid, learner_from(args))
    t0 = time.perf_counter()
    values = exact_values(oracle.evaluate, grid, cap=args.cap)
    elapsed = time.perf_counter() - t0
    write_value_grid(outdir, values)
    write_json(outdir / "config.json", resolved_config(args))
    write_json(outdir / "timing.json", {"seconds": elapsed, "utility_evaluations": oracle.evaluation_count})
    print(outdir / "values.csv")
    return 0


def cmd_value_mc(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    grid = load_partition(args, train)
    oracle = UtilityOracle(train, test, grid, learner_from(args))
    t0 = time.perf_counter()
    values = mc_values(
        oracle.evaluate,
        grid,
        budget=args.budget,
        epsilon=args.epsilon,
        window=args.window,
        seed=resolve_seed(args),
        workers=_workers(args),
        progress=args.progress,
    )
    elapsed = time.perf_counter() - t0
    write_value_grid(outdir, values)
    write_json(outdir / "config.json", resolved_config(args))
    write_json(outdir / "timing.json", {"seconds": elapsed, "utility_evaluations": oracle.evaluation_count})
    print(outdir / "values.csv")
    return 0


def cmd_value_knn(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    grid = load_partition(args, train)
    cfg = KnnConfig(k=args.k, feature_permutations=args.perms, seed=resolve_seed(args))
    t0 = time.perf_counter()
    values = knn_2d_values(
        train,
        test,
        grid,
        cfg,
        epsilon=args.epsilon,
        window=args.window,
        workers=_workers(args),
        progress=args.progress,
    )
    elapsed = time.perf_counter() - t0
    write_value_grid(outdir, values)
    write_json(outdir / "config.json", resolved_config(args))
    write_json(outdir / "timing.json", {"seconds": elapsed})
    print(outdir / "values.csv")
    return 0


def cmd_value_1d(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    grid = load_partition(args, train)
    t0 = time.perf_counter()
    values = baseline_1d_values(
        train,
        test,
        grid,
        learner_from(args),
        budget=args.budget,
        seed=resolve_seed(args),
        workers=_workers(args),
    )
    elapsed = time.perf_counter() - t0
    write_value_grid(outdir, values)
    write_json(outdir / "config.json", resolved_config(args))
    write_json(outdir / "timing.json", {"seconds": elapsed})
    print(outdir / "values.csv")
    return 0


def cmd_verify_weights(args) -> int:
    report = verify_weight_recursion(args.n, args.m, tol=args.tol)
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        outdir = prepare_outdir(args)
        write_json(outdir / "weights_report.json", report)
        write_json(outdir / "config.json", resolved_config(args))
    return 0 if report["pass"] else 1


def cmd_verify_axioms(args) -> int:
    shapes = [(args.n, args.m)]
    games = random_verification_games(shapes, per_shape=args.games, seed=resolve_seed(args))
    report = verify_axioms(exact_psi, games, tol=args.tol, seed=resolve_seed(args))
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out:
        outdir = prepare_outdir(args)
        write_json(outdir / "axioms_report.json", report)
        write_json(outdir / "config.json", resolved_config(args))
    return 0 if report["pass"] else 1


def cmd_exp_remove(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    matrix = load_value_grid(args.values)
    if matrix.shape != (train.n_rows, train.n_cols):
        raise CliError("values file does not match the training matrix (cell grid required)")
    curve = remove_cells(
        train,
        test,
        ranked_cells(matrix),
        batch=args.batch,
        order=args.order,
        learner=learner_from(args),
        seed=resolve_seed(args),
    )
    write_csv(
        outdir / "removal.csv",
        ["step", "cells_removed", "accuracy"],
        [
            [step, min(step * curve.batch, train.n_rows * train.n_cols), acc]
            for step, acc in enumerate(curve.accuracies)
        ],
    )
    write_json(outdir / "config.json", resolved_config(args))
    print(outdir / "removal.csv")
    return 0


def cmd_exp_outliers(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    seed = resolve_seed(args)
    if args.swap_feature is not None:
        pairs = []
        for token in args.swap_digits.split(","):
            a, b = token.split(":")
            pairs.append((float(a), float(b)))
        feature = train.feature_names.index(args.swap_feature) if train.feature_names else int(args.swap_feature)
        corrupted, plan = swap_value_outliers(train, feature, pairs, args.swap_count, seed)
    else:
        corrupted, plan = inject_outliers(
            train,
            budget_fraction=args.budget_fraction,
            density_quantile=args.quantile,
            seed=seed,
        )
    grid = BlockGrid.cells(corrupted.n_rows, corrupted.n_cols)
    cfg = KnnConfig(k=args.surrogate_k, feature_permutations=args.perms, seed=seed)
    values = knn_2d_values(corrupted, test, grid, cfg, workers=_workers(args))
    curve = detection_curve(values, plan)
    write_value_grid(outdir, values)
    write_csv(
        outdir / "detection.csv",
        ["inspected", "recall"],
        [[k, r] for k, r in zip(curve.inspected, curve.detected_fraction)],
    )
    write_json(
        outdir / "plan.json",
        {
            "budget_fraction": plan.budget_fraction,
            "density_quantile": plan.density_quantile,
            "seed": plan.seed,
            "placements": [list(p) for p in plan.placements],
        },
    )
    write_json(outdir / "config.json", resolved_config(args))
    print(outdir / "detection.csv")
    return 0


def cmd_exp_ablation(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    seed = resolve_seed(args)
    budgets = [float(b) for b in args.budgets.split(",")]
    cfg = KnnConfig(k=args.surrogate_k, feature_permutations=args.perms, seed=seed)
    curves = ablation_outlier_budget(train, test, budgets, cfg, seed=seed)
    summary = {}
    for budget, curve in curves.items():
        name = f"detection_{budget:g}.csv"
        write_csv(
            outdir / name,
            ["inspected", "recall"],
            [[k, r] for k, r in zip(curve.inspected, curve.detected_fraction)],
        )
        summary[f"{budget:g}"] = name
    write_json(outdir / "config.json", resolved_config(args))
    write_json(outdir / "curves.json", summary)
    print(outdir / "curves.json")
    return 0


def cmd_exp_blocks(args) -> int:
    outdir = prepare_outdir(args)
    train, test = load_datasets(args)
    grid = load_partition(args, train)
    matrix = load_value_grid(args.values)
    if matrix.shape != (grid.n, grid.m):
        raise CliError("values file does not match the partition dimensions")
    table = block_value_vs_performance(
        train, test, grid, ValueGrid(matrix, method="exact"), learner_from(args)
    )
    write_csv(
        outdir / "blocks.csv",
        ["row_group", "col_group", "value", "accuracy"],
        [[b.block[0], b.block[1], b.value, b.accuracy] for b in table.rows],
    )
    write_json(outdir / "report.json", {"spearman": table.spearman})
    write_json(outdir / "config.json", resolved_config(args))
    print(outdir / "blocks.csv")
    return 0


def cmd_bench_runtime(args) -> int:
    outdir = prepare_outdir(args)
    seed = resolve_seed(args)
    features = args.features
    rows = args.cells // features
    if rows * features != args.cells:
        raise CliError("--cells must be divisible by --features")
    train = synthetic_classification(rows, features, seed=seed)
    test = synthetic_classification(max(rows // 2, 10), features, seed=seed + 1)
    grid = BlockGrid.cells(rows, features)
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    table: dict[str, dict] = {}
    for engine in engines:
        if engine == "mc":
            oracle = UtilityOracle(train, test, grid, learner_from(args))
            t0 = time.perf_counter()
            values = mc_values(
                oracle.evaluate,
                grid,
                budget=args.budget,
                epsilon=args.epsilon,
                window=args.window,
                seed=seed,
                workers=_workers(args),
            )
            table["mc"] = {
                "seconds": time.perf_counter() - t0,
                "permutations": values.permutations_used,
                "converged": values.converged,
            }
        elif engine == "knn":
            cfg = KnnConfig(k=args.k, feature_permutations=args.budget, seed=seed)
            t0 = time.perf_counter()
            values = knn_2d_values(
                train, test, grid, cfg,
                epsilon=args.epsilon, window=args.window, workers=_workers(args),
            )
            table["knn"] = {
                "seconds": time.perf_counter() - t0,
                "permutations": values.permutations_used,
                "converged": values.converged,
            }
        elif engine == "exact":
            # One permutation pair is timed and extrapolated: the full
            # enumeration needs n!*m! pairs, far beyond direct measurement.
            oracle = UtilityOracle(train, test, grid, learner_from(args))
            t0 = time.perf_counter()
            mc_values(oracle.evaluate, grid, budget=1, epsilon=None, window=1, seed=seed)
            per_perm = time.perf_counter() - t0
            log10_pairs = (math.lgamma(rows + 1) + math.lgamma(features + 1)) / math.log(10)
            table["exact"] = {
                "seconds_per_permutation": per_perm,
                "log10_permutation_pairs": log10_pairs,
                "log10_projected_seconds": log10_pairs + math.log10(max(per_perm, 1e-12)),
            }
        else:
            raise CliError(f"unknown engine {engine!r}")
    for name, row in table.items():
        print(f"{name}: " + json.dumps(row, sort_keys=True))
    write_json(outdir / "bench.json", table)
    write_json(outdir / "config.json", resolved_config(args))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fragshap",
        description="Block-level contribution scores for training-data matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value-exact", help="exact values by full enumeration")
    _add_dataset_flags(p)
    _add_common_flags(p)
    _add_learner_flags(p)
    p.add_argument("--cap", type=int, default=24, help="enumeration cap in free bits")
    p.set_defaults(func=cmd_value_exact)

    p = sub.add_parser("value-mc", help="Monte Carlo values over permutation pairs")
    _add_dataset_flags(p)
    _add_common_flags(p)
    _add_learner_flags(p)
    p.add_argument("--budget", type=int, default=500)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--progress", action="store_true", help="progress lines on stderr")
    p.set_defaults(func=cmd_value_mc)

    p = sub.add_parser("value-knn", help="training-free values via the KNN surrogate")
    _add_dataset_flags(p)
    _add_common_flags(p)
    p.add_argument("--k", type=int, default=5, help="surrogate neighbor count")
    p.add_argument("--perms", type=int, default=500, help="feature permutation budget")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_value_knn)

    p = sub.add_parser("value-1d", help="flattened one-dimensional baseline")
    _add_dataset_flags(p)
    _add_common_flags(p)
    _add_learner_flags(p)
    p.add_argument("--budget", type=int, default=500)
    p.set_defaults(func=cmd_value_1d)

    p = sub.add_parser("verify-weights", help="check the closed-form weight system")
    _add_common_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_verify_weights)

    p = sub.add_parser("verify-axioms", help="check the four axioms on random games")
    _add_common_flags(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--games", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_verify_axioms)

    p = sub.add_parser("exp-remove", help="value-ordered cell removal curve")
    _add_dataset_flags(p)
    _add_common_flags(p)
    _add_learner_flags(p)
    p.add_argument("--values", required=True, help="values.csv from a value-* command")
    p.add_argument("--order", choices=("ascending", "descending", "random"), default="ascending")
    p.add_argument("--batch", type=int, default=10)
    p.set_defaults(func=cmd_exp_remove)

    p = sub.add_parser("exp-outliers", help="inject low-density outliers and detect them")
    _add_dataset_flags(p)
    _add_common_flags(p)
    p.add_argument("--budget-fraction", type=float, default=0.02)
    p.add_argument("--quantile", type=float, default=0.05)
    p.add_argument("--surrogate-k", type=int, default=5)
    p.add_argument("--perms", type=int, default=300)
    p.add_argument("--swap-feature", default=None, help="typo-swap mode: feature name or index")
    p.add_argument("--swap-digits", default="", help="value pairs a:b,c:d for typo-swap mode")
    p.add_argument("--swap-count", type=int, default=15)
    p.set_defaults(func=cmd_exp_outliers)

    p = sub.add_parser("exp-ablation", help="detection curves over injection budgets")
    _add_dataset_flags(p)
    _add_common_flags(p)
    p.add_argument("--budgets", default="0.01,0.02,0.05,0.10,0.15")
    p.add_argument("--surrogate-k", type=int, default=5)
    p.add_argument("--perms", type=int, default=300)
    p.set_defaults(func=cmd_exp_ablation)

    p = sub.add_parser("exp-blocks", help="block values vs standalone performance")
    _add_dataset_flags(p)
    _add_common_flags(p)
    _add_learner_flags(p)
    p.add_argument("--values", required=True)
    p.set_defaults(func=cmd_exp_blocks)

    p = sub.add_parser("bench-runtime", help="wall-time comparison of the engines")
    _add_common_flags(p)
    _add_learner_flags(p)
    p.add_argument("--cells", type=int, default=1000)
    p.add_argument("--features", type=int, default=10)
    p.add_argument("--engines", default="mc,knn")
    p.add_argument("--budget", type=int, default=30)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--window", type=int, default=10)
    p.set_defaults(func=cmd_bench_runtime)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CliError, DataError, PartitionError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        print(f"failure: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
