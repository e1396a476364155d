"""Detector feature families computed on fixed-length return segments.

Families and their dimensions:

- acf (100): autocorrelation coefficients at lags 1..100
- acf_abs (100): same, on absolute returns (volatility clustering)
- stats (8): mean, std, median, kurtosis, skewness, Hurst exponent,
  Sharpe ratio, two-sided 2-sigma tail fraction
- sorted (1295): five independently sorted blocks of returns, consecutive
  products/differences and short-window rolling stds
- reoccurrence (6): duplicate-value counts plus binned entropy, sensitive
  to quantized/truncated data
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, ZeroVarianceError
from .panel import Segment

logger = logging.getLogger(__name__)

FAMILY_DIMS = {
    "acf": 100,
    "acf_abs": 100,
    "stats": 8,
    "sorted": 1295,
    "reoccurrence": 6,
}


@dataclass(frozen=True)
class FeatureVector:
    family: str
    values: np.ndarray
    segment_id: str
    warning: bool = False  # sentinel substitution happened

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        expected = FAMILY_DIMS[self.family]
        if len(values) != expected:
            raise ValidationError(
                f"{self.family} vector has {len(values)} values, expected {expected}"
            )
        if np.isnan(values).any():
            raise ValidationError(f"{self.family} vector contains NaN")


@dataclass
class FeatureMatrix:
    family: str
    values: np.ndarray  # (n_segments, dim)
    segment_ids: list[str]
    labels: np.ndarray | None = None
    warnings: np.ndarray = field(default_factory=lambda: np.array([], dtype=bool))

    def __post_init__(self):
        if self.values.shape[1] != FAMILY_DIMS[self.family]:
            raise ValidationError(
                f"{self.family} matrix is {self.values.shape[1]}-wide, "
                f"expected {FAMILY_DIMS[self.family]}"
            )
        if self.labels is not None and len(self.labels) != len(self.values):
            raise ValidationError("labels length must match rows")

    def __len__(self) -> int:
        return len(self.values)


def acf_features(values: np.ndarray, nlags: int = 100, absolute: bool = False) -> np.ndarray:
    """Biased (1/n) sample autocorrelations at lags 1..nlags."""
    x = np.asarray(values, dtype=float)
    if len(x) <= nlags:
        raise ValidationError(f"segment length {len(x)} must exceed nlags {nlags}")
    if absolute:
        x = np.abs(x)
    x = x - x.mean()
    acov = np.correlate(x, x, mode="full")[len(x) - 1 :]
    if acov[0] == 0:
        raise ZeroVarianceError("cannot compute autocorrelation of a constant segment")
    return acov[1 : nlags + 1] / acov[0]


def hurst_exponent(values: np.ndarray) -> float:
    """Rescaled-range estimate: slope of log(R/S) against log(window size).

    Windows are dyadic starting at 16; for series too short to give two
    window sizes below n/2, the full length is added as the second scale.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 32:
        raise ValidationError("Hurst R/S needs at least 32 observations")
    sizes = []
    w = 16
    while w <= n // 2:
        sizes.append(w)
        w *= 2
    if len(sizes) < 2:
        sizes.append(n)
    log_w, log_rs = [], []
    for size in sizes:
        ratios = []
        for start in range(0, n - size + 1, size):
            block = x[start : start + size]
            std = block.std()
            if std == 0:
                continue
            dev = np.cumsum(block - block.mean())
            ratios.append((dev.max() - dev.min()) / std)
        if ratios:
            log_w.append(np.log(size))
            log_rs.append(np.log(np.mean(ratios)))
    if len(log_w) < 2:
        raise ZeroVarianceError("all R/S windows were degenerate")
    return float(np.polyfit(log_w, log_rs, 1)[0])


def stats_features(values: np.ndarray) -> tuple[np.ndarray, bool]:
    """The 8 distribution-shape statistics; returns (vector, sentinel_flag).

    Layout: [mean, std, median, kurtosis, skewness, hurst, sharpe, tail2sigma].
    Kurtosis is the Pearson convention (normal -> 3). A zero-variance segment
    gets sentinel zeros for the moment ratios, Sharpe and tail fraction.
    """
    x = np.asarray(values, dtype=float)
    if len(x) < 32:
        raise ValidationError("stats family needs segments of >= 32 returns")
    mean = float(x.mean())
    std = float(x.std(ddof=1))
    median = float(np.median(x))
    warned = False
    if std == 0:
        return np.array([mean, 0.0, median, 0.0, 0.0, 0.0, 0.0, 0.0]), True
    centered = x - mean
    m2 = float(np.mean(centered**2))
    kurtosis = float(np.mean(centered**4) / m2**2)
    skewness = float(np.mean(centered**3) / m2**1.5)
    try:
        hurst = hurst_exponent(x)
    except ZeroVarianceError:
        hurst = 0.0
        warned = True
    sharpe = mean / std
    tail = float(np.mean(np.abs(x) > 2.0 * std))
    return np.array([mean, std, median, kurtosis, skewness, hurst, sharpe, tail]), warned


def sorted_features(values: np.ndarray) -> np.ndarray:
    """Five ascending-sorted blocks over a 260-return segment (dim 1295).

    Blocks: returns (260), consecutive products (259), consecutive
    differences (259), rolling std of window 2 (259), rolling std of
    window 3 (258). Rolling stds use the n-1 denominator.
    """
    x = np.asarray(values, dtype=float)
    if len(x) != 260:
        raise ValidationError(f"sorted family expects 260 returns, got {len(x)}")
    products = x[:-1] * x[1:]
    differences = x[1:] - x[:-1]
    std2 = np.abs(differences) / np.sqrt(2.0)
    windows3 = np.lib.stride_tricks.sliding_window_view(x, 3)
    std3 = windows3.std(axis=1, ddof=1)
    return np.concatenate(
        [np.sort(x), np.sort(products), np.sort(differences), np.sort(std2), np.sort(std3)]
    )


def binned_entropy(values: np.ndarray, max_bins: int = 10) -> float:
    """Shannon entropy (nats) of an equal-width histogram over [min, max]."""
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        raise ValidationError("binned entropy needs a non-empty segment")
    if x.min() == x.max():
        return 0.0
    hist, _ = np.histogram(x, bins=max_bins)
    probs = hist / len(x)
    probs = probs[probs > 0]
    return float(-np.sum(probs * np.log(probs)))


def reoccurrence_features(values: np.ndarray) -> np.ndarray:
    """Duplicate-structure features (dim 6).

    A reoccurring datapoint is a position whose value appears at another
    position; a reoccurring value is a distinct value with multiplicity >= 2.
    Layout: [pct reoccurring datapoints, sum reoccurring datapoints,
    pct reoccurring values, sum reoccurring values, binned entropy (10 bins),
    distinct count / length].
    """
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        raise ValidationError("reoccurrence features need a non-empty segment")
    uniq, counts = np.unique(x, return_counts=True)
    dup = counts > 1
    return np.array(
        [
            counts[dup].sum() / len(x),
            float((uniq[dup] * counts[dup]).sum()),
            dup.sum() / len(uniq),
            float(uniq[dup].sum()),
            binned_entropy(x),
            len(uniq) / len(x),
        ]
    )


def extract_features(segment: Segment, family: str) -> FeatureVector:
    """Compute one family on one segment, applying the NaN/sentinel policy."""
    if family not in FAMILY_DIMS:
        raise ValidationError(f"unknown feature family {family!r}")
    segment_id = f"{segment.asset_id}:{segment.start}"
    warned = False
    if family in ("acf", "acf_abs"):
        try:
            values = acf_features(segment.values, absolute=family == "acf_abs")
        except ZeroVarianceError:
            logger.warning("zero-variance segment %s: ACF set to zeros", segment_id)
            values, warned = np.zeros(FAMILY_DIMS[family]), True
    elif family == "stats":
        values, warned = stats_features(segment.values)
    elif family == "sorted":
        values = sorted_features(segment.values)
    else:
        values = reoccurrence_features(segment.values)
    values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
    return FeatureVector(family=family, values=values, segment_id=segment_id, warning=warned)


def feature_matrix(segments: list[Segment], family: str) -> FeatureMatrix:
    """Stack one family over many segments; labels kept when all present."""
    if not segments:
        raise ValidationError("no segments given")
    vectors = [extract_features(s, family) for s in segments]
    labels = None
    if all(s.label is not None for s in segments):
        labels = np.array([s.label for s in segments])
    n_warned = sum(v.warning for v in vectors)
    if n_warned:
        warnings.warn(f"{n_warned} segments needed sentinel substitution", stacklevel=2)
    return FeatureMatrix(
        family=family,
        values=np.vstack([v.values for v in vectors]),
        segment_ids=[v.segment_id for v in vectors],
        labels=labels,
        warnings=np.array([v.warning for v in vectors]),
    )
