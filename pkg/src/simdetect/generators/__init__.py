"""Simulation methods, all exposing fit(panel) / simulate(n_assets, length, seed)."""

from ..errors import ValidationError
from .base import Generator, as_panel, cov_factor
from .garch import GarchGenerator, GarchParams, fit_garch, garch_loglik, simulate_garch
from .replay import ReplayGenerator
from .sde import SdeGenerator, SdeParams, fit_sde, simulate_sde
from .trendpath import (
    TrendPathGenerator,
    TrendPathModel,
    fit_trend_path_model,
    simulate_trend_path_model,
)
from .trendwin import (
    PcaBasis,
    TrendWindowGenerator,
    TrendWindowModel,
    fit_trend_window_model,
    pca_basis,
    pca_enlarge,
    simulate_trend_window_model,
)

GENERATOR_IDS = ("m1", "m2", "gbm", "cev", "egarch", "gjr")


def make_generator(method: str, **kwargs) -> Generator:
    """Instantiate a generator by its CLI id."""
    if method == "m1":
        return TrendWindowGenerator(**kwargs)
    if method == "m2":
        return TrendPathGenerator(**kwargs)
    if method in ("gbm", "cev"):
        return SdeGenerator(method, **kwargs)
    if method in ("egarch", "gjr"):
        return GarchGenerator(method, **kwargs)
    raise ValidationError(f"unknown generation method {method!r}")


__all__ = [
    "GENERATOR_IDS",
    "Generator",
    "GarchGenerator",
    "GarchParams",
    "PcaBasis",
    "ReplayGenerator",
    "SdeGenerator",
    "SdeParams",
    "TrendPathGenerator",
    "TrendPathModel",
    "TrendWindowGenerator",
    "TrendWindowModel",
    "as_panel",
    "cov_factor",
    "fit_garch",
    "fit_sde",
    "fit_trend_path_model",
    "fit_trend_window_model",
    "garch_loglik",
    "make_generator",
    "pca_basis",
    "pca_enlarge",
    "simulate_garch",
    "simulate_sde",
    "simulate_trend_path_model",
    "simulate_trend_window_model",
]
