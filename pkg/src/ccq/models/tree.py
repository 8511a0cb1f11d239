"""Binary classification tree grown on the Gini criterion.

Split search: at each node a subset of features is sampled, candidate
thresholds are the midpoints between consecutive sorted unique values,
and the (feature, threshold) pair minimizing the weighted child Gini
impurity wins. Ties resolve to the first candidate encountered (lowest
threshold within a feature, earliest feature in sampling order). Growth
stops when a node is pure, has fewer than ``min_samples_split`` samples,
or no candidate split strictly reduces impurity. Leaves predict the
majority label, ties going to class 0.
"""

from __future__ import annotations

import numpy as np

__all__ = ["EmptyNode", "gini_impurity", "TreeNode", "DecisionTree", "train_tree"]


class EmptyNode(ValueError):
    def __init__(self) -> None:
        super().__init__("gini impurity is undefined for an empty node")


def gini_impurity(class_counts) -> float:
    """1 - sum((count_i / total)^2) over classes."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("class counts must be non-negative")
    total = counts.sum()
    if total == 0:
        raise EmptyNode()
    shares = counts / total
    return float(1.0 - np.sum(shares * shares))


class TreeNode:
    """Internal node (feature >= 0) or leaf (feature == -1)."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature=-1, threshold=0.0, left=None, right=None, value=0):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _leaf(y_node: np.ndarray) -> TreeNode:
    ones = int(y_node.sum())
    # Majority label; an exact tie goes to class 0.
    return TreeNode(value=1 if 2 * ones > y_node.size else 0)


def _best_split(Xn, yn, min_samples_leaf, parent_gini):
    """Best (column, threshold, impurity) over the node slice, or None."""
    n = Xn.shape[0]
    order = np.argsort(Xn, axis=0, kind="stable")
    Xs = np.take_along_axis(Xn, order, axis=0)
    ys = yn[order]  # (n, f)

    left_ones = np.cumsum(ys, axis=0)[:-1].astype(np.float64)
    total_ones = float(yn.sum())
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = float(n) - nl
    left_zeros = nl - left_ones
    right_ones = total_ones - left_ones
    right_zeros = nr - right_ones

    gini_left = 1.0 - ((left_ones / nl) ** 2 + (left_zeros / nl) ** 2)
    gini_right = 1.0 - ((right_ones / nr) ** 2 + (right_zeros / nr) ** 2)
    weighted = (nl * gini_left + nr * gini_right) / float(n)

    valid = Xs[1:] > Xs[:-1]  # boundaries between distinct consecutive values
    if min_samples_leaf > 1:
        sizes_ok = (nl >= min_samples_leaf) & (nr >= min_samples_leaf)
        valid = valid & sizes_ok
    weighted = np.where(valid, weighted, np.inf)

    best_row = np.argmin(weighted, axis=0)  # first minimum per column
    best_vals = weighted[best_row, np.arange(weighted.shape[1])]
    col = int(np.argmin(best_vals))  # first column on ties
    impurity = float(best_vals[col])
    if not np.isfinite(impurity) or impurity >= parent_gini:
        return None
    row = int(best_row[col])
    threshold = 0.5 * (Xs[row, col] + Xs[row + 1, col])
    return col, threshold, impurity


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> "DecisionTree":
    """Grow a tree to purity (subject to the stopping rules above).

    ``max_features`` limits how many features are sampled (without
    replacement, from ``rng``) at each node; None means all features.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    if n < 1:
        raise ValueError("training set must be non-empty")
    if max_features is None or max_features >= d:
        max_features = d
    if max_features < 1:
        raise ValueError("max_features must be >= 1")
    if max_features < d and rng is None:
        raise ValueError("feature subsampling requires an rng")

    root = TreeNode()
    # Depth-first growth; left child is processed before right so the rng
    # stream consumption order is deterministic.
    stack = [(root, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        y_node = y[idx]
        ones = int(y_node.sum())
        if ones == 0 or ones == idx.size or idx.size < min_samples_split:
            leaf = _leaf(y_node)
            node.feature, node.value = leaf.feature, leaf.value
            continue
        if max_features < d:
            feats = rng.choice(d, size=max_features, replace=False)
        else:
            feats = np.arange(d)
        parent_gini = gini_impurity([idx.size - ones, ones])
        found = _best_split(X[np.ix_(idx, feats)], y_node, min_samples_leaf, parent_gini)
        if found is None:
            leaf = _leaf(y_node)
            node.feature, node.value = leaf.feature, leaf.value
            continue
        col, threshold, _ = found
        feature = int(feats[col])
        mask = X[idx, feature] <= threshold
        node.feature = feature
        node.threshold = float(threshold)
        node.left = TreeNode()
        node.right = TreeNode()
        stack.append((node.right, idx[~mask]))
        stack.append((node.left, idx[mask]))
    return DecisionTree(root, n_features=d)


class DecisionTree:
    """Immutable fitted tree; route left when ``x[feature] <= threshold``."""

    def __init__(self, root: TreeNode, n_features: int):
        self.root = root
        self.n_features = n_features

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        stack = [(self.root, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.is_leaf:
                out[idx] = node.value
                continue
            mask = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
        return out

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            if not node.is_leaf:
                stack.extend((node.left, node.right))
        return count

    def to_dict(self) -> dict:
        def encode(node: TreeNode) -> dict:
            if node.is_leaf:
                return {"leaf": int(node.value)}
            return {
                "feature": int(node.feature),
                "threshold": float(node.threshold),
                "left": encode(node.left),
                "right": encode(node.right),
            }

        return {"n_features": self.n_features, "root": encode(self.root)}

    @classmethod
    def from_dict(cls, payload: dict) -> "DecisionTree":
        def decode(obj: dict) -> TreeNode:
            if "leaf" in obj:
                return TreeNode(value=int(obj["leaf"]))
            return TreeNode(
                feature=int(obj["feature"]),
                threshold=float(obj["threshold"]),
                left=decode(obj["left"]),
                right=decode(obj["right"]),
            )

        return cls(decode(payload["root"]), n_features=int(payload["n_features"]))
