"""Ensemble of 1-nearest-neighbor classifiers under cosine distance.

Members differ only through independent random subsamples of the training
set; the ensemble score is the fraction of members whose nearest stored
neighbor carries class 1, so scores live on the grid {0, 1/m, ..., 1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class KnnEnsembleModel:
    members: tuple[tuple[np.ndarray, np.ndarray], ...]  # (unit rows, labels)
    n_members: int
    subsample_fraction: float
    seed: int


def _unit_rows(X: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(norms == 0)
    if len(bad):
        raise ValidationError(f"zero-norm {what} rows at indices {bad.tolist()[:5]}")
    return X / norms[:, None]


def knn_train(
    X: np.ndarray,
    y: np.ndarray,
    n_members: int = 40,
    subsample_fraction: float = 0.632,
    seed: int = 0,
) -> KnnEnsembleModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise ValidationError("need both classes present to train")
    unit = _unit_rows(X, "training")
    rng = np.random.default_rng(seed)
    size = max(1, round(subsample_fraction * len(X)))
    members = []
    for _ in range(n_members):
        # sorted so that cosine ties resolve to the lowest original index
        idx = np.sort(rng.choice(len(X), size=size, replace=False))
        members.append((unit[idx], y[idx]))
    return KnnEnsembleModel(
        members=tuple(members),
        n_members=n_members,
        subsample_fraction=subsample_fraction,
        seed=seed,
    )


def knn_score(model: KnnEnsembleModel, X: np.ndarray) -> np.ndarray:
    """Fraction of members voting class 1 for each query row."""
    unit = _unit_rows(np.asarray(X, dtype=float), "query")
    votes = np.zeros(len(unit))
    for stored, labels in model.members:
        similarity = unit @ stored.T
        votes += labels[np.argmax(similarity, axis=1)]
    return votes / model.n_members
