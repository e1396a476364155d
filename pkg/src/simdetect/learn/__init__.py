"""From-scratch classifiers behind the detectors; all score in [0, 1]."""

from .bagging import (
    BaggedTreesModel,
    ImportanceReport,
    bag_score,
    bag_train,
    permutation_importance,
)
from .boosting import GradientBoostModel, gboost_score, gboost_train
from .knn import KnnEnsembleModel, knn_score, knn_train
from .tree import DecisionTree, TreeNode, regression_tree_train, tree_apply, tree_train

__all__ = [
    "BaggedTreesModel",
    "DecisionTree",
    "GradientBoostModel",
    "ImportanceReport",
    "KnnEnsembleModel",
    "TreeNode",
    "bag_score",
    "bag_train",
    "gboost_score",
    "gboost_train",
    "knn_score",
    "knn_train",
    "permutation_importance",
    "regression_tree_train",
    "tree_apply",
    "tree_train",
]
