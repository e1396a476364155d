"""Detectors: a feature family paired with a classifier, scoring segments.

Built-in detectors:

- acf_knn:        returns ACF (100)      + 40-member 1-NN cosine ensemble
- absacf_knn:     |returns| ACF (100)    + 40-member 1-NN cosine ensemble
- stats_bag:      8 shape statistics     + 100 bagged trees
- sorted_gboost:  1295 sorted features   + gradient boosting
- reoccur_gboost: 6 duplicate features   + gradient boosting
- constant:       no features, scores 0.5 everywhere (calibration dummy)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .features import FeatureMatrix, feature_matrix
from .learn import (
    bag_score,
    bag_train,
    gboost_score,
    gboost_train,
    knn_score,
    knn_train,
)
from .panel import Segment
from .seeding import derive_seed


@dataclass(frozen=True)
class DetectorSpec:
    name: str
    family: str | None  # None for the constant dummy
    classifier: str  # "knn" | "bag" | "gboost" | "constant"


DETECTORS: dict[str, DetectorSpec] = {
    "acf_knn": DetectorSpec("acf_knn", "acf", "knn"),
    "absacf_knn": DetectorSpec("absacf_knn", "acf_abs", "knn"),
    "stats_bag": DetectorSpec("stats_bag", "stats", "bag"),
    "sorted_gboost": DetectorSpec("sorted_gboost", "sorted", "gboost"),
    "reoccur_gboost": DetectorSpec("reoccur_gboost", "reoccurrence", "gboost"),
    "constant": DetectorSpec("constant", None, "constant"),
}


@dataclass
class FittedDetector:
    spec: DetectorSpec
    model: object | None


def detector_spec(name: str) -> DetectorSpec:
    if name not in DETECTORS:
        raise ValidationError(
            f"unknown detector {name!r}; known: {sorted(DETECTORS)}"
        )
    return DETECTORS[name]


def train_detector(name: str, segments: list[Segment], seed: int = 0) -> FittedDetector:
    """Build the family's features on labeled segments and fit the classifier."""
    spec = detector_spec(name)
    if spec.classifier == "constant":
        return FittedDetector(spec=spec, model=None)
    features = feature_matrix(segments, spec.family)
    if features.labels is None:
        raise ValidationError("training segments must all be labeled")
    return FittedDetector(
        spec=spec,
        model=train_classifier(spec.classifier, features.values, features.labels, seed),
    )


def train_classifier(kind: str, X: np.ndarray, y: np.ndarray, seed: int = 0):
    if kind == "knn":
        return knn_train(X, y, seed=derive_seed(seed, "knn"))
    if kind == "bag":
        return bag_train(X, y, seed=derive_seed(seed, "bag"))
    if kind == "gboost":
        return gboost_train(X, y, seed=derive_seed(seed, "gboost"))
    raise ValidationError(f"unknown classifier kind {kind!r}")


def score_detector(detector: FittedDetector, segments: list[Segment]) -> np.ndarray:
    """Scores in [0, 1]; higher means more simulated-looking."""
    if detector.spec.classifier == "constant":
        return np.full(len(segments), 0.5)
    features = feature_matrix(segments, detector.spec.family)
    return score_classifier(detector.spec.classifier, detector.model, features.values)


def score_classifier(kind: str, model, X: np.ndarray) -> np.ndarray:
    if kind == "knn":
        return knn_score(model, X)
    if kind == "bag":
        return bag_score(model, X)
    if kind == "gboost":
        return gboost_score(model, X)
    raise ValidationError(f"unknown classifier kind {kind!r}")


def score_feature_matrix(detector: FittedDetector, features: FeatureMatrix) -> np.ndarray:
    """Score precomputed features (must match the detector's family)."""
    if detector.spec.classifier == "constant":
        return np.full(len(features), 0.5)
    if features.family != detector.spec.family:
        raise ValidationError(
            f"detector wants {detector.spec.family!r} features, got {features.family!r}"
        )
    return score_classifier(detector.spec.classifier, detector.model, features.values)
