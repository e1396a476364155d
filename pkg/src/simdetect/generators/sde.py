"""Diffusion baselines: geometric Brownian motion and constant elasticity
of variance, fitted to pooled panel moments.

Both work on price paths rebuilt from returns with p(0) = 1, which also
pins down the scale-dependent CEV volatility parameter. One period = one
time step (dt = 1).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..panel import Panel
from ..seeding import derive_seed
from .base import as_panel

logger = logging.getLogger(__name__)

PRICE_FLOOR = 1e-8  # on p(0) = 1 scale


@dataclass(frozen=True)
class SdeParams:
    kind: str  # "gbm" | "cev"
    mu: float  # drift per period
    sigma: float  # volatility per period
    gamma: float = 1.0  # price-power of volatility (gbm fixes 1)

    def __post_init__(self):
        if self.kind not in ("gbm", "cev"):
            raise ValidationError(f"unknown SDE kind {self.kind!r}")
        if self.sigma < 0:
            raise ValidationError("sigma must be >= 0")


def fit_sde(panel: Panel, kind: str) -> SdeParams:
    """Moment fit on pooled returns; CEV elasticity from a log-log regression."""
    if panel.n_periods < 30:
        raise ValidationError("need >= 30 returns per asset to fit an SDE")
    if kind == "gbm":
        log_returns = np.log1p(panel.matrix).ravel()
        sigma = float(np.std(log_returns, ddof=1))
        mu = float(np.mean(log_returns) + 0.5 * sigma**2)
        return SdeParams(kind="gbm", mu=mu, sigma=sigma)
    if kind != "cev":
        raise ValidationError(f"unknown SDE kind {kind!r}")
    prices = np.cumprod(1.0 + panel.matrix, axis=1)
    prices = np.concatenate([np.ones((panel.n_assets, 1)), prices], axis=1)
    prev = prices[:, :-1].ravel()
    moves = np.diff(prices, axis=1).ravel()
    mu = float(np.mean(panel.matrix))
    nonzero = np.abs(moves) > 0
    if nonzero.sum() < 30:
        raise ValidationError("too few non-zero price moves to estimate elasticity")
    x = np.log(prev[nonzero])
    y = np.log(np.abs(moves[nonzero]))
    slope = float(np.polyfit(x, y, 1)[0])
    resid = (moves - mu * prev) / prev**slope
    sigma = float(np.sqrt(np.mean(resid**2)))
    return SdeParams(kind="cev", mu=mu, sigma=sigma, gamma=slope)


def simulate_sde(
    params: SdeParams, n_assets: int, length: int, seed: int
) -> tuple[Panel, int]:
    """Simulate i.i.d. asset paths; returns (panel, floor_hit_count).

    GBM paths are exact (log returns are i.i.d. Gaussian); CEV uses an
    Euler-Maruyama step with the price floored at a small epsilon.
    """
    rng = np.random.default_rng(derive_seed(seed, f"sde-{params.kind}"))
    if params.kind == "gbm":
        log_returns = rng.normal(
            params.mu - 0.5 * params.sigma**2, params.sigma, size=(n_assets, length)
        )
        return as_panel(np.expm1(log_returns)), 0
    shocks = rng.standard_normal((n_assets, length))
    prices = np.empty((n_assets, length + 1))
    prices[:, 0] = 1.0
    floor_hits = 0
    for t in range(length):
        s = prices[:, t]
        step = s + params.mu * s + params.sigma * s**params.gamma * shocks[:, t]
        hit = step < PRICE_FLOOR
        floor_hits += int(hit.sum())
        prices[:, t + 1] = np.where(hit, PRICE_FLOOR, step)
    returns = prices[:, 1:] / prices[:, :-1] - 1.0
    return as_panel(returns), floor_hits


class SdeGenerator:
    """fit/simulate wrapper for the diffusion baselines."""

    def __init__(self, kind: str):
        if kind not in ("gbm", "cev"):
            raise ValidationError(f"unknown SDE kind {kind!r}")
        self.name = kind
        self.params: SdeParams | None = None
        self.last_floor_hits = 0

    def fit(self, panel: Panel) -> "SdeGenerator":
        self.params = fit_sde(panel, self.name)
        return self

    def simulate(self, n_assets: int, length: int, seed: int) -> Panel:
        if self.params is None:
            raise ValidationError("generator must be fitted before simulating")
        panel, floor_hits = simulate_sde(self.params, n_assets, length, seed)
        self.last_floor_hits = floor_hits
        if floor_hits:
            logger.warning("CEV simulation hit the price floor %d times", floor_hits)
        return panel
