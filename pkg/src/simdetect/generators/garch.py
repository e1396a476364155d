"""Univariate asymmetric GARCH baselines with Student-t innovations.

Two (1,1) recursions:

- gjr:    sig2[t] = omega + (alpha + leverage*[eps<0]) * eps[t-1]^2 + beta*sig2[t-1]
- egarch: log sig2[t] = omega + beta*log sig2[t-1]
                        + alpha*(|z[t-1]| - E|z|) + leverage*z[t-1]

Fitting maximizes the Student-t likelihood with a derivative-free simplex
over unconstrained reparameterizations (log / logistic / softmax), multi-
start to dodge local optima. Given the data, the GJR variance recursion is
a linear IIR filter in sig2, so its likelihood is evaluated with
scipy.signal.lfilter; EGARCH is genuinely sequential and uses a plain loop.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import expit, gammaln, logit

from ..errors import FitFailureError, ValidationError
from ..panel import Panel, ReturnSeries
from ..seeding import derive_seed
from .base import as_panel

logger = logging.getLogger(__name__)

MIN_NU = 2.05
MAX_PERSISTENCE = 0.9995


@dataclass(frozen=True)
class GarchParams:
    kind: str  # "egarch" | "gjr"
    omega: float
    alpha: float
    beta: float
    leverage: float
    nu: float  # Student-t degrees of freedom
    mu: float  # mean return

    def __post_init__(self):
        if self.kind not in ("egarch", "gjr"):
            raise ValidationError(f"unknown GARCH kind {self.kind!r}")
        if self.nu <= 2:
            raise ValidationError("nu must exceed 2 for a finite variance")
        if self.kind == "gjr":
            if min(self.omega, self.alpha, self.beta, self.leverage) < 0:
                raise ValidationError("gjr parameters must be non-negative")
            if self.alpha + self.beta + self.leverage / 2 >= 1:
                raise ValidationError("gjr violates alpha + beta + leverage/2 < 1")
        elif abs(self.beta) >= 1:
            raise ValidationError("egarch requires |beta| < 1")


def abs_moment_std_t(nu: float) -> float:
    """E|z| for a unit-variance Student-t innovation."""
    return (
        2.0
        * math.sqrt(nu - 2.0)
        * math.exp(gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0))
        / (math.sqrt(math.pi) * (nu - 1.0))
    )


def _t_const(nu: float) -> float:
    return float(
        gammaln((nu + 1.0) / 2.0)
        - gammaln(nu / 2.0)
        - 0.5 * math.log(math.pi * (nu - 2.0))
    )


def gjr_unconditional_variance(params: GarchParams) -> float:
    return params.omega / (1.0 - params.alpha - params.beta - params.leverage / 2.0)


def gjr_variance_path(params: GarchParams, returns: np.ndarray) -> np.ndarray:
    """Conditional variances, initialized at the unconditional variance.

    Given the data the recursion is linear in sigma2, so it runs as an IIR
    filter instead of a Python loop.
    """
    eps = returns - params.mu
    sigma2_0 = gjr_unconditional_variance(params)
    shock = (params.alpha + params.leverage * (eps < 0)) * eps**2
    drive = params.omega + shock[:-1]
    tail, _ = lfilter(
        [1.0], [1.0, -params.beta], drive, zi=np.array([params.beta * sigma2_0])
    )
    return np.concatenate([[sigma2_0], tail])


def egarch_variance_path(params: GarchParams, returns: np.ndarray) -> np.ndarray:
    """Conditional variances from the exponential recursion."""
    eps = returns - params.mu
    expected_abs = abs_moment_std_t(params.nu)
    log_sig2 = params.omega / (1.0 - params.beta)  # unconditional level
    out = np.empty(len(returns))
    omega, beta, alpha, lev = params.omega, params.beta, params.alpha, params.leverage
    for t in range(len(returns)):
        log_sig2 = min(max(log_sig2, -500.0), 500.0)
        sig2 = math.exp(log_sig2)
        out[t] = sig2
        z = eps[t] / math.sqrt(sig2)
        log_sig2 = omega + beta * log_sig2 + alpha * (abs(z) - expected_abs) + lev * z
    return out


def garch_loglik(params: GarchParams, returns: np.ndarray) -> float:
    """Student-t log-likelihood of the (1,1) recursion."""
    returns = np.asarray(returns, dtype=float)
    if params.kind == "gjr":
        sigma2 = gjr_variance_path(params, returns)
    else:
        sigma2 = egarch_variance_path(params, returns)
    if not np.all(np.isfinite(sigma2)) or np.any(sigma2 <= 0):
        return -np.inf
    z2 = (returns - params.mu) ** 2 / sigma2
    nu = params.nu
    return float(
        len(returns) * _t_const(nu)
        - 0.5 * np.sum(np.log(sigma2))
        - 0.5 * (nu + 1.0) * np.sum(np.log1p(z2 / (nu - 2.0)))
    )


def _gjr_from_raw(raw: np.ndarray) -> GarchParams:
    mu, log_omega, logit_s, wa, wb, log_nu = raw
    s = float(expit(logit_s)) * MAX_PERSISTENCE
    logits = np.array([wa, wb, 0.0])
    weights = np.exp(logits - np.logaddexp.reduce(logits))
    return GarchParams(
        kind="gjr",
        omega=float(np.exp(log_omega)),
        alpha=s * float(weights[0]),
        beta=s * float(weights[1]),
        leverage=2.0 * s * float(weights[2]),
        nu=MIN_NU + float(np.exp(log_nu)),
        mu=float(mu),
    )


def _gjr_to_raw(params: GarchParams) -> np.ndarray:
    s = params.alpha + params.beta + params.leverage / 2.0
    w = np.maximum([params.alpha / s, params.beta / s, params.leverage / 2.0 / s], 1e-8)
    return np.array(
        [
            params.mu,
            math.log(params.omega),
            float(logit(min(s / MAX_PERSISTENCE, 1 - 1e-6))),
            math.log(w[0] / w[2]),
            math.log(w[1] / w[2]),
            math.log(max(params.nu - MIN_NU, 1e-6)),
        ]
    )


def _egarch_from_raw(raw: np.ndarray) -> GarchParams:
    mu, omega, atanh_beta, alpha, lev, log_nu = raw
    return GarchParams(
        kind="egarch",
        omega=float(omega),
        alpha=float(alpha),
        beta=float(np.tanh(atanh_beta)) * MAX_PERSISTENCE,
        leverage=float(lev),
        nu=MIN_NU + float(np.exp(log_nu)),
        mu=float(mu),
    )


def _egarch_to_raw(params: GarchParams) -> np.ndarray:
    return np.array(
        [
            params.mu,
            params.omega,
            float(np.arctanh(np.clip(params.beta / MAX_PERSISTENCE, -1 + 1e-9, 1 - 1e-9))),
            params.alpha,
            params.leverage,
            math.log(max(params.nu - MIN_NU, 1e-6)),
        ]
    )


def default_start(returns: np.ndarray, kind: str) -> GarchParams:
    """Variance-targeting initial guess."""
    variance = float(np.var(returns, ddof=1))
    mu = float(np.mean(returns))
    if kind == "gjr":
        return GarchParams(
            kind="gjr",
            omega=variance * (1.0 - 0.925),
            alpha=0.05,
            beta=0.85,
            leverage=0.05,
            nu=8.0,
            mu=mu,
        )
    return GarchParams(
        kind="egarch",
        omega=0.1 * math.log(max(variance, 1e-300)),
        alpha=0.1,
        beta=0.9,
        leverage=-0.05,
        nu=8.0,
        mu=mu,
    )


def fit_garch(
    returns, kind: str, seed: int = 0, n_starts: int = 3, maxiter: int = 4000
) -> GarchParams:
    """Maximum-likelihood fit via multi-start Nelder-Mead.

    Raises FitFailureError (carrying the best log-likelihood found) if no
    start converges within the iteration budget.
    """
    if isinstance(returns, ReturnSeries):
        returns = returns.returns
    returns = np.asarray(returns, dtype=float)
    if len(returns) < 500:
        raise ValidationError("need >= 500 returns for a stable GARCH fit")
    if np.var(returns) == 0:
        raise ValidationError("returns have zero variance")
    from_raw = _gjr_from_raw if kind == "gjr" else _egarch_from_raw
    to_raw = _gjr_to_raw if kind == "gjr" else _egarch_to_raw

    def objective(raw: np.ndarray) -> float:
        try:
            return -garch_loglik(from_raw(raw), returns)
        except (ValidationError, OverflowError):
            return np.inf

    raw0 = to_raw(default_start(returns, kind))
    rng = np.random.default_rng(derive_seed(seed, f"garch-fit-{kind}"))
    starts = [raw0] + [
        raw0 + rng.normal(0.0, 0.5, size=raw0.shape) for _ in range(n_starts - 1)
    ]
    best = None
    any_converged = False
    for raw_start in starts:
        res = minimize(
            objective,
            raw_start,
            method="Nelder-Mead",
            options={"maxiter": maxiter, "xatol": 1e-6, "fatol": 1e-8},
        )
        any_converged = any_converged or bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    if not any_converged:
        raise FitFailureError(
            f"{kind} fit did not converge in {maxiter} iterations",
            best_loglik=-float(best.fun),
        )
    return from_raw(best.x)


def simulate_garch(
    params_list: list[GarchParams], n_assets: int, length: int, seed: int
) -> Panel:
    """Simulate assets independently, each using one fitted parameter set.

    Parameter sets are assigned to assets by uniform draw, so a per-asset
    fitted panel reproduces the cross-section of dynamics.
    """
    if not params_list:
        raise ValidationError("need at least one parameter set")
    kind = params_list[0].kind
    if any(p.kind != kind for p in params_list):
        raise ValidationError("all parameter sets must share one model kind")
    rng = np.random.default_rng(derive_seed(seed, f"garch-sim-{kind}"))
    pick = rng.integers(0, len(params_list), size=n_assets)
    omega = np.array([params_list[i].omega for i in pick])
    alpha = np.array([params_list[i].alpha for i in pick])
    beta = np.array([params_list[i].beta for i in pick])
    lev = np.array([params_list[i].leverage for i in pick])
    nu = np.array([params_list[i].nu for i in pick])
    mu = np.array([params_list[i].mu for i in pick])
    t_scale = np.sqrt((nu - 2.0) / nu)
    out = np.empty((n_assets, length))
    if kind == "gjr":
        sig2 = omega / (1.0 - alpha - beta - lev / 2.0)
        for t in range(length):
            z = rng.standard_t(nu) * t_scale
            eps = np.sqrt(sig2) * z
            out[:, t] = mu + eps
            sig2 = omega + (alpha + lev * (eps < 0)) * eps**2 + beta * sig2
    else:
        expected_abs = np.array([abs_moment_std_t(float(n)) for n in nu])
        log_sig2 = omega / (1.0 - beta)
        for t in range(length):
            log_sig2 = np.clip(log_sig2, -500.0, 500.0)
            z = rng.standard_t(nu) * t_scale
            out[:, t] = mu + np.exp(0.5 * log_sig2) * z
            log_sig2 = omega + beta * log_sig2 + alpha * (np.abs(z) - expected_abs) + lev * z
    return as_panel(out)


class GarchGenerator:
    """Per-asset MLE fit; simulation samples uniformly among the fitted sets."""

    def __init__(self, kind: str, n_starts: int = 3, seed: int = 0):
        if kind not in ("egarch", "gjr"):
            raise ValidationError(f"unknown GARCH kind {kind!r}")
        self.name = kind
        self.n_starts = n_starts
        self.seed = seed
        self.params_list: list[GarchParams] = []

    def fit(self, panel: Panel) -> "GarchGenerator":
        self.params_list = []
        failures = 0
        for row, asset_id in enumerate(panel.asset_ids):
            try:
                self.params_list.append(
                    fit_garch(
                        panel.matrix[row],
                        self.name,
                        seed=derive_seed(self.seed, f"asset-{asset_id}"),
                        n_starts=self.n_starts,
                    )
                )
            except FitFailureError:
                failures += 1
                logger.warning("GARCH fit failed for asset %s; skipping", asset_id)
        if not self.params_list:
            raise FitFailureError(f"all {failures} per-asset fits failed")
        return self

    def simulate(self, n_assets: int, length: int, seed: int) -> Panel:
        if not self.params_list:
            raise ValidationError("generator must be fitted before simulating")
        return simulate_garch(self.params_list, n_assets, length, seed)
