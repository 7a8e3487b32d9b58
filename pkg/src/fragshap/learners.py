"""Small deterministic in-core classifiers used by the utility oracles.

All predictors break class ties toward the lowest class index, so repeated
evaluations of the same data are bitwise identical.
"""

from __future__ import annotations

import numpy as np


def standardize_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean/scale of a training matrix; constant columns get scale 1."""
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    return mu, sd


def standardize_apply(x: np.ndarray, mu: np.ndarray, sd: np.ndarray) -> np.ndarray:
    return (x - mu) / sd


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (len(a), len(b))."""
    d = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def knn_predict(
    x_train: np.ndarray, y_train: np.ndarray, x_test: np.ndarray, k: int, class_count: int
) -> np.ndarray:
    """Majority vote over the k nearest training rows.

    Distance ties resolve toward the earlier training row (stable sort) and
    vote ties toward the lowest class index.
    """
    k_eff = min(k, x_train.shape[0])
    order = np.argsort(squared_distances(x_test, x_train), axis=1, kind="stable")
    votes = y_train[order[:, :k_eff]]
    counts = np.zeros((x_test.shape[0], class_count), dtype=np.intp)
    np.add.at(counts, (np.arange(x_test.shape[0])[:, None], votes), 1)
    return counts.argmax(axis=1)


def logistic_regression_predict(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_test: np.ndarray,
    class_count: int,
    steps: int,
    rate: float,
) -> np.ndarray:
    """Multinomial logistic regression by full-batch gradient descent from a
    zero initialization, run for a fixed step budget."""
    n = x_train.shape[0]
    xa = np.hstack([x_train, np.ones((n, 1))])
    onehot = np.zeros((n, class_count))
    onehot[np.arange(n), y_train] = 1.0
    w = np.zeros((xa.shape[1], class_count))
    for _ in range(steps):
        logits = xa @ w
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        w -= rate * (xa.T @ (p - onehot)) / n
    xt = np.hstack([x_test, np.ones((x_test.shape[0], 1))])
    return (xt @ w).argmax(axis=1)


def majority_class_predict(
    y_train: np.ndarray, n_test: int, class_count: int
) -> np.ndarray:
    counts = np.bincount(y_train, minlength=class_count)
    return np.full(n_test, counts.argmax(), dtype=np.intp)


def accuracy(predictions: np.ndarray, y_true: np.ndarray) -> float:
    return float(np.mean(predictions == y_true))
