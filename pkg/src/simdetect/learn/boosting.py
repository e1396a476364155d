"""Stagewise gradient boosting for binary classification (logistic loss).

Each round fits a depth-limited regression tree to the residuals y - p and
takes one Newton step per leaf. A per-round step backoff keeps the recorded
training log-loss nonincreasing, and a held-out validation slice provides
early stopping.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .tree import DecisionTree, regression_tree_train, tree_apply

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradientBoostModel:
    init_logodds: float
    trees: tuple[DecisionTree, ...]
    scales: tuple[float, ...]  # learning rate after any backoff, per tree
    train_losses: tuple[float, ...]  # log-loss after each accepted round
    best_round: int  # rounds kept after early stopping


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def _logloss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def gboost_train(
    X: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 200,
    learning_rate: float = 0.1,
    max_depth: int = 3,
    min_leaf: int = 1,
    seed: int = 0,
    valid_fraction: float = 0.2,
    patience: int = 20,
) -> GradientBoostModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValidationError("need both classes present to train")
    if not set(classes) <= {0.0, 1.0}:
        raise ValidationError("labels must be binary 0/1")

    base_rate = float(y.mean())
    init = float(np.log(base_rate / (1.0 - base_rate)))

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(X))
    n_valid = int(valid_fraction * len(X))
    valid_idx, train_idx = order[:n_valid], order[n_valid:]
    if n_valid == 0 or len(np.unique(y[valid_idx])) < 2:
        valid_idx = np.array([], dtype=int)
        train_idx = np.arange(len(X))
        logger.warning("validation slice unusable; early stopping disabled")
    Xt, yt = X[train_idx], y[train_idx]
    Xv, yv = X[valid_idx], y[valid_idx]

    f_train = np.full(len(Xt), init)
    f_valid = np.full(len(Xv), init)
    trees: list[DecisionTree] = []
    scales: list[float] = []
    train_losses: list[float] = []
    last_loss = _logloss(yt, _sigmoid(f_train))
    best_valid, best_round, stall = np.inf, 0, 0

    for _ in range(n_rounds):
        p = _sigmoid(f_train)
        tree = regression_tree_train(
            Xt, grad=yt - p, hess=p * (1.0 - p), max_depth=max_depth, min_leaf=min_leaf
        )
        step = tree_apply(tree, Xt)
        scale = learning_rate
        # halve the step until the round does not increase training loss
        for _ in range(12):
            loss = _logloss(yt, _sigmoid(f_train + scale * step))
            if loss <= last_loss:
                break
            scale /= 2.0
        else:
            logger.warning("round rejected: no step scale decreased the loss")
            break
        f_train += scale * step
        trees.append(tree)
        scales.append(scale)
        train_losses.append(loss)
        last_loss = loss

        if len(valid_idx):
            f_valid += scale * tree_apply(tree, Xv)
            valid_loss = _logloss(yv, _sigmoid(f_valid))
            if valid_loss < best_valid - 1e-9:
                best_valid, best_round, stall = valid_loss, len(trees), 0
            else:
                stall += 1
                if stall >= patience:
                    break
        else:
            best_round = len(trees)

    return GradientBoostModel(
        init_logodds=init,
        trees=tuple(trees[:best_round]),
        scales=tuple(scales[:best_round]),
        train_losses=tuple(train_losses),
        best_round=best_round,
    )


def gboost_score(model: GradientBoostModel, X: np.ndarray) -> np.ndarray:
    """sigmoid(init + sum of scaled tree outputs), in (0, 1)."""
    X = np.asarray(X, dtype=float)
    f = np.full(len(X), model.init_logodds)
    for tree, scale in zip(model.trees, model.scales):
        f += scale * tree_apply(tree, X)
    return _sigmoid(f)
