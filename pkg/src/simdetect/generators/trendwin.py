"""Trend-windowed multivariate Gaussian generator (CLI id ``m1``).

Within each ex-post trend, a non-overlapping window slides over the panel;
every window contributes the sample mean vector and covariance matrix of
the cross-asset return vectors inside it. Synthesis replays an alternating
random sequence of fitted trends, drawing Gaussian returns window by
window. Extra assets beyond the fitted count are produced by enlarging a
PCA transformation matrix with artificial eigenvector rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDomainError, ValidationError
from ..panel import Panel
from ..seeding import derive_seed
from ..trends import TrendSegmentation, equal_weight_index, segment_trends
from .base import alternating_trend_sequence, as_panel, cov_factor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowedTrend:
    direction: str
    means: np.ndarray  # (n_windows, n_assets)
    factors: np.ndarray  # (n_windows, n_assets, n_assets), factor @ factor.T = cov

    @property
    def n_windows(self) -> int:
        return self.means.shape[0]


@dataclass(frozen=True)
class TrendWindowModel:
    window: int
    n_assets: int
    trends: tuple[WindowedTrend, ...]

    def directions(self) -> list[str]:
        return [t.direction for t in self.trends]


@dataclass(frozen=True)
class PcaBasis:
    """Eigenvector decomposition of a return panel, for asset-count enlargement."""

    transform: np.ndarray  # W, eigenvectors as columns (n, n)
    components: np.ndarray  # R' = W.T @ centered returns (n, T)
    row_mean: np.ndarray  # mean of W's rows (n,)
    row_cov: np.ndarray  # covariance of W's rows (n, n)
    asset_means: np.ndarray  # per-asset mean return (n,)


def fit_trend_window_model(
    panel: Panel, seg: TrendSegmentation, window: int = 20
) -> TrendWindowModel:
    """Fit per-trend sequences of windowed mean vectors and covariances.

    Each trend of length L yields floor(L / window) windows; trends shorter
    than one window are skipped with a warning.
    """
    if window < 2:
        raise ValidationError("window must be >= 2 for a sample covariance")
    if panel.n_assets < 2:
        raise ValidationError("need >= 2 assets to fit cross-asset covariances")
    trends = []
    for start, end, direction in seg.intervals:
        n_windows = (end - start) // window
        if n_windows < 1:
            logger.warning(
                "skipping %s trend [%d, %d): shorter than window %d",
                direction, start, end, window,
            )
            continue
        means = np.empty((n_windows, panel.n_assets))
        factors = np.empty((n_windows, panel.n_assets, panel.n_assets))
        for w in range(n_windows):
            block = panel.matrix[:, start + w * window : start + (w + 1) * window]
            means[w] = block.mean(axis=1)
            factors[w] = cov_factor(np.cov(block, ddof=1))
        trends.append(WindowedTrend(direction=direction, means=means, factors=factors))
    if not trends:
        raise EmptyDomainError("every trend was shorter than the window")
    return TrendWindowModel(window=window, n_assets=panel.n_assets, trends=tuple(trends))


def simulate_trend_window_model(
    model: TrendWindowModel, n_assets: int, length: int, seed: int
) -> Panel:
    """Draw an alternating trend sequence and Gaussian returns per window.

    When more assets are requested than were fitted, the panel is widened
    by PCA enlargement; when fewer, the first rows are returned.
    """
    rng = np.random.default_rng(derive_seed(seed, "trend-window-sim"))
    n_base = model.n_assets
    columns = []
    produced = 0
    for idx in alternating_trend_sequence(model.directions(), rng):
        trend = model.trends[idx]
        for w in range(trend.n_windows):
            z = rng.standard_normal((n_base, model.window))
            block = trend.means[w][:, None] + trend.factors[w] @ z
            columns.append(block)
            produced += model.window
        if produced >= length:
            break
    matrix = np.concatenate(columns, axis=1)[:, :length]
    if n_assets > n_base:
        logger.info("enlarging PCA basis from %d to %d assets", n_base, n_assets)
        basis = pca_basis(matrix)
        enlarged = pca_enlarge(basis, n_assets, derive_seed(seed, "pca-enlarge"))
        mean_fill = np.concatenate(
            [basis.asset_means, np.full(n_assets - n_base, basis.asset_means.mean())]
        )
        matrix = enlarged @ basis.components + mean_fill[:, None]
    elif n_assets < n_base:
        matrix = matrix[:n_assets]
    return as_panel(matrix)


def pca_basis(matrix: np.ndarray) -> PcaBasis:
    """Decompose an assets x time return matrix into eigenvectors/components."""
    matrix = np.asarray(matrix, dtype=float)
    asset_means = matrix.mean(axis=1)
    centered = matrix - asset_means[:, None]
    cov = np.cov(centered, ddof=1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    transform = eigvecs[:, order]
    return PcaBasis(
        transform=transform,
        components=transform.T @ centered,
        row_mean=transform.mean(axis=0),
        row_cov=np.cov(transform, rowvar=False, ddof=1),
        asset_means=asset_means,
    )


def pca_enlarge(basis: PcaBasis, target_dim: int, seed: int) -> np.ndarray:
    """Widen the transformation matrix to ``target_dim`` rows.

    Original rows are kept bit-identical; new rows are drawn from the
    Gaussian fitted to the original rows.
    """
    current = basis.transform.shape[0]
    if target_dim < current:
        raise ValidationError(
            f"target_dim {target_dim} is below the current dimension {current}"
        )
    if target_dim == current:
        return basis.transform
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((target_dim - current, current))
    new_rows = basis.row_mean + z @ cov_factor(basis.row_cov).T
    return np.vstack([basis.transform, new_rows])


class TrendWindowGenerator:
    """fit/simulate wrapper bundling index construction and segmentation."""

    name = "m1"

    def __init__(self, window: int = 20, min_move: float = 0.10, min_length: int = 15):
        self.window = window
        self.min_move = min_move
        self.min_length = min_length
        self.model: TrendWindowModel | None = None
        self.segmentation: TrendSegmentation | None = None

    def fit(self, panel: Panel) -> "TrendWindowGenerator":
        index = equal_weight_index(panel)
        self.segmentation = segment_trends(index, self.min_move, self.min_length)
        self.model = fit_trend_window_model(panel, self.segmentation, self.window)
        return self

    def simulate(self, n_assets: int, length: int, seed: int) -> Panel:
        if self.model is None:
            raise ValidationError("generator must be fitted before simulating")
        return simulate_trend_window_model(self.model, n_assets, length, seed)
