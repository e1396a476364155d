"""Binary CART trees: Gini classification and squared-error regression.

Split search is exact over midpoints of sorted distinct values, evaluated
for all features at once with prefix sums. Growth uses an explicit stack so
full-depth trees never hit Python's recursion limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


@dataclass
class TreeNode:
    value: float  # leaf payload: P(class 1) or regression value
    n_samples: int
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class DecisionTree:
    root: TreeNode
    max_depth: int | None
    min_leaf: int
    n_features: int


def _best_split(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    min_leaf: int,
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, gain) maximizing sum(g)^2 / sum(h) reduction.

    With grad = y and hess = 1 this is exactly the Gini / variance criterion
    up to an additive constant, so one search serves both tree kinds.
    """
    n, _ = X.shape
    if n < 2 * min_leaf:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    gl = np.cumsum(grad[order], axis=0)[:-1]
    hl = np.cumsum(hess[order], axis=0)[:-1]
    g_total, h_total = grad.sum(), hess.sum()
    gr = g_total - gl
    hr = h_total - hl
    counts = np.arange(1, n)[:, None]
    valid = (xs[:-1] < xs[1:]) & (counts >= min_leaf) & (n - counts >= min_leaf)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(valid, gl**2 / hl + gr**2 / hr, -np.inf)
    i, j = np.unravel_index(np.argmax(score), score.shape)
    gain = float(score[i, j] - g_total**2 / h_total)
    if not np.isfinite(gain) or gain <= 1e-12:
        return None
    threshold = float((xs[i, j] + xs[i + 1, j]) / 2.0)
    return int(j), threshold, gain


def _grow(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    leaf_value,
    max_depth: int | None,
    min_leaf: int,
) -> TreeNode:
    all_rows = np.arange(len(X))
    root = TreeNode(value=leaf_value(all_rows), n_samples=len(X))
    stack = [(root, all_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        if max_depth is not None and depth >= max_depth:
            continue
        grad_rows = grad[rows]
        if np.all(grad_rows == grad_rows[0]):  # pure node
            continue
        found = _best_split(X[rows], grad_rows, hess[rows], min_leaf)
        if found is None:
            continue
        feature, threshold, _ = found
        go_left = X[rows, feature] <= threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        node.feature, node.threshold = feature, threshold
        node.left = TreeNode(value=leaf_value(left_rows), n_samples=len(left_rows))
        node.right = TreeNode(value=leaf_value(right_rows), n_samples=len(right_rows))
        stack.append((node.left, left_rows, depth + 1))
        stack.append((node.right, right_rows, depth + 1))
    return root


def tree_train(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int | None = None,
    min_leaf: int = 1,
) -> DecisionTree:
    """Greedy Gini CART on binary labels; leaves hold P(class 1)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0:
        raise ValidationError("X must be a non-empty 2-D matrix")
    if len(y) != len(X):
        raise ValidationError("X and y length mismatch")
    if not set(np.unique(y)) <= {0, 1}:
        raise ValidationError("labels must be binary 0/1")
    yf = y.astype(float)
    ones = np.ones(len(X))

    root = _grow(
        X,
        yf,
        ones,
        leaf_value=lambda rows: float(yf[rows].mean()),
        max_depth=max_depth,
        min_leaf=min_leaf,
    )
    return DecisionTree(root=root, max_depth=max_depth, min_leaf=min_leaf, n_features=X.shape[1])


def regression_tree_train(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    max_depth: int = 3,
    min_leaf: int = 1,
) -> DecisionTree:
    """Squared-error tree on the gradients, one-Newton-step leaf values."""

    def leaf_value(rows) -> float:
        return float(grad[rows].sum() / (hess[rows].sum() + 1e-12))

    root = _grow(X, grad, np.ones(len(X)), leaf_value, max_depth, min_leaf)
    return DecisionTree(root=root, max_depth=max_depth, min_leaf=min_leaf, n_features=X.shape[1])


def tree_apply(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    """Leaf values for every row, traversed with index masks."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise ValidationError(
            f"X must be 2-D with {tree.n_features} features, got {X.shape}"
        )
    out = np.empty(len(X))
    stack = [(tree.root, np.arange(len(X)))]
    while stack:
        node, rows = stack.pop()
        if len(rows) == 0:
            continue
        if node.is_leaf:
            out[rows] = node.value
            continue
        go_left = X[rows, node.feature] <= node.threshold
        stack.append((node.left, rows[go_left]))
        stack.append((node.right, rows[~go_left]))
    return out
