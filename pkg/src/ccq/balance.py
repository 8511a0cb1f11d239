"""SMOTE synthetic minority oversampling.

New minority points are interpolations ``x + u * (x_nn - x)`` between a
minority row and one of its k nearest minority neighbours (Euclidean
distance on the raw vectors), appended until the minority count reaches
``round(target_ratio * majority_count)``. Original rows are never
touched; synthetic rows carry ids ``synthetic-<i>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .embedding import FeatureMatrix

__all__ = [
    "SmoteConfig",
    "BalanceError",
    "TooFewMinority",
    "SingleClass",
    "minority_knn",
    "smote",
]


class BalanceError(Exception):
    pass


class TooFewMinority(BalanceError):
    def __init__(self, count: int, k: int):
        self.count = count
        self.k = k
        super().__init__(f"minority class has {count} rows, need more than k={k}")


class SingleClass(BalanceError):
    def __init__(self) -> None:
        super().__init__("both classes must be present to balance")


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0  # minority/majority after balancing
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not (0.0 < self.target_ratio <= 1.0):
            raise ValueError("target_ratio must be in (0, 1]")


def minority_knn(rows: np.ndarray, k: int) -> np.ndarray:
    """Indices of each row's k nearest other rows (Euclidean).

    Ties resolve to the lower index. Returns an (n, k) integer array.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n = len(rows)
    if n <= k:
        raise TooFewMinority(n, k)
    d2 = cdist(rows, rows, metric="sqeuclidean")
    np.fill_diagonal(d2, np.inf)
    # Stable sort keeps equal distances in index order.
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def smote(matrix: FeatureMatrix, config: SmoteConfig) -> FeatureMatrix:
    """Append synthetic minority rows until class parity per config.

    The output keeps the original rows as a prefix, in order. With a
    fixed rng_seed the result is bitwise reproducible.
    """
    labels = matrix.labels
    counts = np.bincount(labels, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        raise SingleClass()
    minority_label = int(np.argmin(counts))
    n_minority = int(counts[minority_label])
    n_majority = int(counts[1 - minority_label])

    n_synthetic = int(round(config.target_ratio * n_majority)) - n_minority
    if n_synthetic <= 0:
        return matrix

    if n_minority <= config.k_neighbors:
        raise TooFewMinority(n_minority, config.k_neighbors)

    minority_rows = matrix.rows[labels == minority_label]
    neighbors = minority_knn(minority_rows, config.k_neighbors)

    rng = np.random.default_rng(config.rng_seed)
    base = rng.integers(0, n_minority, size=n_synthetic)
    picked = neighbors[base, rng.integers(0, config.k_neighbors, size=n_synthetic)]
    u = rng.random(size=(n_synthetic, 1))
    synthetic = minority_rows[base] + u * (minority_rows[picked] - minority_rows[base])

    rows = np.vstack([matrix.rows, synthetic])
    new_labels = np.concatenate(
        [labels, np.full(n_synthetic, minority_label, dtype=labels.dtype)]
    )
    ids = matrix.ids + tuple(f"synthetic-{i}" for i in range(n_synthetic))
    return FeatureMatrix(rows=rows, labels=new_labels, ids=ids)
