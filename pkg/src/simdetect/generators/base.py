"""Shared generator plumbing: the fit/simulate contract and small helpers."""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from ..errors import AlternationError
from ..panel import Panel


@runtime_checkable
class Generator(Protocol):
    """Uniform contract all simulation methods expose."""

    name: str

    def fit(self, panel: Panel) -> "Generator":
        ...

    def simulate(self, n_assets: int, length: int, seed: int) -> Panel:
        ...


def cov_factor(cov: np.ndarray) -> np.ndarray:
    """Factor A with A @ A.T = cov, valid for singular PSD matrices.

    Eigendecomposition with negative eigenvalues clipped to zero, so sampling
    x = mean + A @ z works for rank-deficient covariances.
    """
    eigvals, eigvecs = np.linalg.eigh(cov)
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def alternating_trend_sequence(directions: list[str], rng: np.random.Generator):
    """Yield trend-pool indices with strictly alternating directions.

    The starting direction is drawn at random; each step picks uniformly
    among pool entries of the required direction.
    """
    up_pool = [i for i, d in enumerate(directions) if d == "up"]
    down_pool = [i for i, d in enumerate(directions) if d == "down"]
    if not up_pool or not down_pool:
        raise AlternationError(
            "trend pool needs at least one up and one down trend to alternate"
        )
    pools = {"up": up_pool, "down": down_pool}
    direction = "up" if rng.integers(0, 2) == 0 else "down"
    while True:
        pool = pools[direction]
        yield pool[rng.integers(0, len(pool))]
        direction = "down" if direction == "up" else "up"


def sim_asset_ids(n_assets: int) -> tuple[str, ...]:
    width = max(4, len(str(n_assets)))
    return tuple(f"sim{i:0{width}d}" for i in range(n_assets))


def as_panel(matrix: np.ndarray) -> Panel:
    return Panel(
        asset_ids=sim_asset_ids(matrix.shape[0]),
        timestamps=np.arange(matrix.shape[1]),
        matrix=matrix,
    )
