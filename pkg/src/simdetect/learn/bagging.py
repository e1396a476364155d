"""Bootstrap-aggregated decision trees with out-of-bag bookkeeping.

Every tree sees a bootstrap sample of the full training size; rows it never
drew form its out-of-bag set, which funds both the unbiased error estimate
and permutation feature importance (mean increase in out-of-bag prediction
error when one feature's column is shuffled).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .tree import DecisionTree, tree_apply, tree_train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaggedTreesModel:
    trees: tuple[DecisionTree, ...]
    bootstrap_indices: tuple[np.ndarray, ...]
    n_rows: int
    seed: int


@dataclass(frozen=True)
class ImportanceReport:
    importances: np.ndarray  # (n_features,) mean OOB error increase
    baseline_error: float
    n_trees_used: int


def bag_train(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 100,
    max_depth: int | None = None,
    min_leaf: int = 1,
    seed: int = 0,
) -> BaggedTreesModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    trees, indices = [], []
    for _ in range(n_trees):
        idx = rng.integers(0, len(X), size=len(X))
        trees.append(tree_train(X[idx], y[idx], max_depth=max_depth, min_leaf=min_leaf))
        indices.append(idx)
    return BaggedTreesModel(
        trees=tuple(trees), bootstrap_indices=tuple(indices), n_rows=len(X), seed=seed
    )


def bag_score(model: BaggedTreesModel, X: np.ndarray) -> np.ndarray:
    """Mean of per-tree leaf probabilities."""
    X = np.asarray(X, dtype=float)
    total = np.zeros(len(X))
    for tree in model.trees:
        total += tree_apply(tree, X)
    return total / len(model.trees)


def oob_masks(model: BaggedTreesModel) -> list[np.ndarray]:
    masks = []
    for idx in model.bootstrap_indices:
        mask = np.ones(model.n_rows, dtype=bool)
        mask[idx] = False
        masks.append(mask)
    return masks


def permutation_importance(
    model: BaggedTreesModel, X: np.ndarray, y: np.ndarray, seed: int = 0
) -> ImportanceReport:
    """Per-feature mean (OOB error after shuffling that column) - (OOB error).

    Predictions are hard-thresholded at 0.5; trees without out-of-bag rows
    are skipped with a warning.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if len(X) != model.n_rows:
        raise ValidationError("X must be the training matrix the model was built on")
    rng = np.random.default_rng(seed)
    n_features = X.shape[1]
    deltas = np.zeros(n_features)
    baselines = []
    used = 0
    for tree, mask in zip(model.trees, oob_masks(model)):
        oob = np.flatnonzero(mask)
        if len(oob) == 0:
            logger.warning("tree has no out-of-bag rows; skipped")
            continue
        used += 1
        X_oob, y_oob = X[oob], y[oob]
        base_err = np.mean((tree_apply(tree, X_oob) >= 0.5) != y_oob)
        baselines.append(base_err)
        for j in range(n_features):
            shuffled = X_oob.copy()
            shuffled[:, j] = shuffled[rng.permutation(len(oob)), j]
            err = np.mean((tree_apply(tree, shuffled) >= 0.5) != y_oob)
            deltas[j] += err - base_err
    if used == 0:
        raise ValidationError("no tree had out-of-bag rows")
    return ImportanceReport(
        importances=deltas / used,
        baseline_error=float(np.mean(baselines)),
        n_trees_used=used,
    )
