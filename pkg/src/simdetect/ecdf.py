"""Empirical CDF as a step function, with a left-continuous inverse.

Used by the trend-path generator to map equalized (rank-uniform) draws back
onto the observed return support, so simulated values are always observed
quantiles of the real data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class EmpiricalCdf:
    support: np.ndarray  # unique values, ascending
    probs: np.ndarray  # cumulative probabilities, ends at 1.0

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if len(support) == 0:
            raise ValidationError("empirical CDF needs at least one value")
        if len(support) != len(probs):
            raise ValidationError("support and probs must have equal length")

    def __len__(self) -> int:
        return len(self.support)


def ecdf_build(values) -> EmpiricalCdf:
    """Empirical CDF of a sample; duplicates collapse into larger steps."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValidationError("cannot build an empirical CDF from no values")
    support, counts = np.unique(values, return_counts=True)
    return EmpiricalCdf(support=support, probs=np.cumsum(counts) / values.size)


def ecdf_eval(cdf: EmpiricalCdf, v) -> np.ndarray | float:
    """P(X <= v) under the empirical distribution."""
    v = np.asarray(v, dtype=float)
    idx = np.searchsorted(cdf.support, v, side="right")
    out = np.where(idx > 0, cdf.probs[np.maximum(idx - 1, 0)], 0.0)
    return float(out) if out.ndim == 0 else out


def ecdf_inverse(cdf: EmpiricalCdf, u) -> np.ndarray | float:
    """Left-continuous quantile: smallest support value with cum. prob >= u.

    Defined for u in (0, 1]; u = 1 returns the sample maximum.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr > 1.0):
        raise ValidationError("u must lie in (0, 1]")
    idx = np.minimum(
        np.searchsorted(cdf.probs, u_arr, side="left"), len(cdf.support) - 1
    )
    out = cdf.support[idx]
    return float(out) if out.ndim == 0 else out
