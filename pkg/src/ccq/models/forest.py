"""Random forest of Gini trees with bootstrap sampling.

Each tree owns an independent rng stream seeded ``rng_seed + tree_index``
which drives its bootstrap draw and per-node feature sampling, so fits
are reproducible and trees could be built in any order. Prediction is a
majority vote over trees; an exact tie goes to class 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tree import DecisionTree, train_tree

__all__ = ["RandomForestConfig", "RandomForestModel"]


@dataclass(frozen=True)
class RandomForestConfig:
    n_estimators: int = 100
    criterion: str = "gini"
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str | int | None = "sqrt"
    bootstrap: bool = True
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.criterion != "gini":
            raise ValueError("only the gini criterion is supported")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be >= 0")


def _resolve_max_features(spec: str | int | None, n_features: int) -> int:
    if spec is None or spec == "all":
        return n_features
    if spec == "sqrt":
        return min(n_features, math.ceil(math.sqrt(n_features)))
    if isinstance(spec, int):
        if spec < 1:
            raise ValueError("max_features must be >= 1")
        return min(n_features, spec)
    raise ValueError(f"unsupported max_features {spec!r}")


class RandomForestModel:
    kind = "rf"
    display_name = "RF"

    def __init__(self, config: RandomForestConfig | None = None):
        self.config = config or RandomForestConfig()
        self.trees: tuple[DecisionTree, ...] = ()
        self.metadata: dict = {}

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForestModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n, d = X.shape
        max_features = _resolve_max_features(self.config.max_features, d)
        trees = []
        for t in range(self.config.n_estimators):
            rng = np.random.default_rng(self.config.rng_seed + t)
            if self.config.bootstrap:
                idx = rng.integers(0, n, size=n)
                X_t, y_t = X[idx], y[idx]
            else:
                X_t, y_t = X, y
            trees.append(
                train_tree(
                    X_t,
                    y_t,
                    min_samples_split=self.config.min_samples_split,
                    min_samples_leaf=self.config.min_samples_leaf,
                    max_features=max_features,
                    rng=rng,
                )
            )
        self.trees = tuple(trees)
        self.metadata = {
            "seed": self.config.rng_seed,
            "n_trees": len(trees),
            "max_features": max_features,
        }
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise RuntimeError("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        ones = np.zeros(len(X), dtype=np.int64)
        for tree in self.trees:
            ones += tree.predict(X)
        return (2 * ones > len(self.trees)).astype(np.int64)
