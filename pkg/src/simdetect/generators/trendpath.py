"""Trend-path Gaussian generator with empirical quantile mapping (CLI id ``m2``).

Each asset's return path inside one trend is treated as a single
multivariate sample whose dimensions are the time steps, so the covariance
between adjacent dimensions captures average autocorrelation. Because only
n_assets samples exist per trend, the time x time covariance is represented
by its exact rank-k factor instead of a regularized full matrix.

Simulated paths are histogram-equalized (rank to mid-rank uniform) and then
pushed through the inverse empirical CDF of the trend's pooled real
returns, so every simulated value is an observed quantile and heavy tails
carry over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ecdf import EmpiricalCdf, ecdf_build, ecdf_inverse
from ..errors import ValidationError
from ..panel import Panel
from ..seeding import derive_seed
from ..trends import TrendSegmentation, equal_weight_index, segment_trends
from .base import alternating_trend_sequence, as_panel


@dataclass(frozen=True)
class PathTrend:
    direction: str
    mean: np.ndarray  # (T,) per-time-step mean across assets
    factor: np.ndarray  # (T, k) with factor @ factor.T = cross-asset sample cov
    cdf: EmpiricalCdf  # pooled real returns of the trend

    @property
    def length(self) -> int:
        return len(self.mean)


@dataclass(frozen=True)
class TrendPathModel:
    n_assets: int
    trends: tuple[PathTrend, ...]

    def directions(self) -> list[str]:
        return [t.direction for t in self.trends]


def fit_trend_path_model(panel: Panel, seg: TrendSegmentation) -> TrendPathModel:
    """One mean vector, covariance factor and pooled CDF per trend."""
    if panel.n_assets < 2:
        raise ValidationError("need >= 2 assets: each asset is one multivariate sample")
    trends = []
    for start, end, direction in seg.intervals:
        block = panel.matrix[:, start:end]  # (n_assets, T)
        mean = block.mean(axis=0)
        centered = block - mean
        # economy SVD of the sample matrix gives the exact rank-k factor:
        # centered.T @ centered / (n-1) == factor @ factor.T
        _, svals, vt = np.linalg.svd(centered, full_matrices=False)
        k = min(panel.n_assets - 1, end - start)
        factor = (vt.T * svals)[:, :k] / np.sqrt(panel.n_assets - 1)
        trends.append(
            PathTrend(
                direction=direction,
                mean=mean,
                factor=factor,
                cdf=ecdf_build(block),
            )
        )
    return TrendPathModel(n_assets=panel.n_assets, trends=tuple(trends))


def equalize_ranks(values: np.ndarray) -> np.ndarray:
    """Map a vector to mid-rank uniforms (rank - 0.5) / n, along the last axis."""
    order = np.argsort(values, axis=-1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(values.shape[-1]), axis=-1)
    return (ranks + 0.5) / values.shape[-1]


def simulate_trend_path_model(
    model: TrendPathModel, n_assets: int, length: int, seed: int
) -> Panel:
    """Alternating trends; per trend each asset is one Gaussian path draw.

    New assets need no enlargement machinery: they are simply further draws
    from the same per-trend distribution.
    """
    rng = np.random.default_rng(derive_seed(seed, "trend-path-sim"))
    blocks = []
    produced = 0
    for idx in alternating_trend_sequence(model.directions(), rng):
        trend = model.trends[idx]
        z = rng.standard_normal((n_assets, trend.factor.shape[1]))
        paths = trend.mean + z @ trend.factor.T  # (n_assets, T)
        uniforms = equalize_ranks(paths)
        blocks.append(ecdf_inverse(trend.cdf, uniforms))
        produced += trend.length
        if produced >= length:
            break
    return as_panel(np.concatenate(blocks, axis=1)[:, :length])


class TrendPathGenerator:
    """fit/simulate wrapper bundling index construction and segmentation."""

    name = "m2"

    def __init__(self, min_move: float = 0.10, min_length: int = 15):
        self.min_move = min_move
        self.min_length = min_length
        self.model: TrendPathModel | None = None
        self.segmentation: TrendSegmentation | None = None

    def fit(self, panel: Panel) -> "TrendPathGenerator":
        index = equal_weight_index(panel)
        self.segmentation = segment_trends(index, self.min_move, self.min_length)
        self.model = fit_trend_path_model(panel, self.segmentation)
        return self

    def simulate(self, n_assets: int, length: int, seed: int) -> Panel:
        if self.model is None:
            raise ValidationError("generator must be fitted before simulating")
        return simulate_trend_path_model(self.model, n_assets, length, seed)
