"""Return-series containers and dataset operations.

The universal data currency is the simple per-period return
r(t) = p(t)/p(t-1) - 1. A Panel is an aligned assets x time matrix of
returns sharing one timestamp grid. Segments are fixed-length contiguous
slices extracted at random for classifier training/testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSplitError,
    DuplicateNoiseError,
    EmptyDomainError,
    ValidationError,
)

LABEL_REAL = 0
LABEL_SIMULATED = 1

PARTITION_MODES = (
    "by_asset",
    "by_period",
    "by_asset_then_period",
    "by_period_then_asset",
)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PriceSeries:
    """One asset's price history. Prices strictly positive, timestamps increasing."""

    asset_id: str
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        prices = _freeze(np.asarray(self.prices, dtype=float))
        timestamps = _freeze(np.asarray(self.timestamps))
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "timestamps", timestamps)
        if len(prices) != len(timestamps):
            raise ValidationError(
                f"{self.asset_id}: {len(prices)} prices vs {len(timestamps)} timestamps"
            )
        if len(prices) and np.min(prices) <= 0:
            raise ValidationError(f"{self.asset_id}: prices must be strictly positive")
        if len(timestamps) > 1 and not np.all(timestamps[1:] > timestamps[:-1]):
            raise ValidationError(f"{self.asset_id}: timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSeries:
    """One asset's simple returns; every return > -1."""

    asset_id: str
    returns: np.ndarray

    def __post_init__(self):
        returns = _freeze(np.asarray(self.returns, dtype=float))
        object.__setattr__(self, "returns", returns)
        if len(returns) and np.min(returns) <= -1:
            raise ValidationError(f"{self.asset_id}: returns must be > -1")

    def __len__(self) -> int:
        return len(self.returns)


@dataclass(frozen=True)
class Panel:
    """Aligned multivariate return matrix: one row per asset, one column per date."""

    asset_ids: tuple[str, ...]
    timestamps: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _freeze(np.asarray(self.matrix, dtype=float))
        timestamps = _freeze(np.asarray(self.timestamps))
        object.__setattr__(self, "asset_ids", tuple(self.asset_ids))
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "timestamps", timestamps)
        if matrix.ndim != 2:
            raise ValidationError("panel matrix must be 2-D (assets x time)")
        if matrix.shape[0] != len(self.asset_ids):
            raise ValidationError(
                f"{matrix.shape[0]} rows vs {len(self.asset_ids)} asset ids"
            )
        if matrix.shape[1] != len(timestamps):
            raise ValidationError(
                f"{matrix.shape[1]} columns vs {len(timestamps)} timestamps"
            )
        if len(set(self.asset_ids)) != len(self.asset_ids):
            raise ValidationError("asset ids must be unique")
        if np.isnan(matrix).any():
            raise ValidationError("panel has missing cells after alignment")
        if len(timestamps) > 1 and not np.all(timestamps[1:] > timestamps[:-1]):
            raise ValidationError("panel timestamps must be strictly increasing")

    @property
    def n_assets(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_periods(self) -> int:
        return self.matrix.shape[1]

    def row(self, asset_id: str) -> np.ndarray:
        return self.matrix[self.asset_ids.index(asset_id)]


@dataclass(frozen=True)
class Segment:
    """Fixed-length contiguous slice of one asset's returns."""

    values: np.ndarray
    asset_id: str
    start: int
    label: int | None = None  # LABEL_REAL / LABEL_SIMULATED, None when unlabeled

    def __post_init__(self):
        values = _freeze(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PartitionSpec:
    """How to split a panel into two disjoint subsets."""

    mode: str
    split_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.mode not in PARTITION_MODES:
            raise ValidationError(f"unknown partition mode {self.mode!r}")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValidationError("split_fraction must be in (0, 1)")


def to_returns(prices: PriceSeries) -> ReturnSeries:
    """Simple returns r(t) = p(t)/p(t-1) - 1."""
    if len(prices) < 2:
        raise ValidationError("need at least 2 prices to compute returns")
    p = prices.prices
    return ReturnSeries(prices.asset_id, p[1:] / p[:-1] - 1.0)


def to_prices(returns: ReturnSeries, p0: float, timestamps=None) -> PriceSeries:
    """Rebuild a price path multiplicatively: p(t) = p(t-1) * (1 + r(t))."""
    if p0 <= 0:
        raise ValidationError("p0 must be positive")
    prices = p0 * np.concatenate(([1.0], np.cumprod(1.0 + returns.returns)))
    if timestamps is None:
        timestamps = np.arange(len(prices))
    return PriceSeries(returns.asset_id, timestamps, prices)


def price_path(returns: np.ndarray, p0: float = 1.0) -> np.ndarray:
    """Cumulative price path of a raw return vector (length + 1 points)."""
    return p0 * np.concatenate(([1.0], np.cumprod(1.0 + np.asarray(returns))))


def extract_segments(
    panel: Panel,
    length: int,
    n: int,
    seed: int,
    asset_subset: tuple[str, ...] | list[str] | None = None,
    period: tuple | None = None,
    label: int | None = None,
) -> list[Segment]:
    """Draw ``n`` random contiguous segments of ``length`` returns.

    Sampling is uniform over eligible (asset, start) pairs, with replacement,
    and a pure function of the arguments plus ``seed``. ``period`` restricts
    segments to timestamps t with period[0] <= t <= period[1]; the whole
    segment must fall inside.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if length < 1:
        raise ValidationError("length must be >= 1")
    if asset_subset is None:
        asset_rows = np.arange(panel.n_assets)
    else:
        missing = [a for a in asset_subset if a not in panel.asset_ids]
        if missing:
            raise ValidationError(f"assets not in panel: {missing}")
        asset_rows = np.array([panel.asset_ids.index(a) for a in asset_subset])

    lo, hi = 0, panel.n_periods
    if period is not None:
        t0, t1 = period
        inside = (panel.timestamps >= t0) & (panel.timestamps <= t1)
        idx = np.flatnonzero(inside)
        if len(idx) == 0:
            raise EmptyDomainError("period selects no timestamps")
        lo, hi = int(idx[0]), int(idx[-1]) + 1

    n_starts = hi - lo - length + 1
    if len(asset_rows) == 0 or n_starts < 1:
        raise EmptyDomainError(
            f"no eligible (asset, start) pair for length {length} in window [{lo}, {hi})"
        )

    rng = np.random.default_rng(seed)
    rows = asset_rows[rng.integers(0, len(asset_rows), size=n)]
    starts = lo + rng.integers(0, n_starts, size=n)
    return [
        Segment(
            values=panel.matrix[r, s : s + length],
            asset_id=panel.asset_ids[r],
            start=int(s),
            label=label,
        )
        for r, s in zip(rows, starts)
    ]


def _subpanel_assets(panel: Panel, rows: np.ndarray) -> Panel:
    return Panel(
        asset_ids=tuple(panel.asset_ids[i] for i in rows),
        timestamps=panel.timestamps,
        matrix=panel.matrix[rows],
    )


def _subpanel_periods(panel: Panel, lo: int, hi: int) -> Panel:
    return Panel(
        asset_ids=panel.asset_ids,
        timestamps=panel.timestamps[lo:hi],
        matrix=panel.matrix[:, lo:hi],
    )


def _split_by_asset(panel: Panel, fraction: float, seed: int) -> tuple[Panel, Panel]:
    if panel.n_assets < 2:
        raise DegenerateSplitError("by_asset split needs >= 2 assets")
    k = int(np.floor(fraction * panel.n_assets))
    if k == 0 or k == panel.n_assets:
        raise DegenerateSplitError(
            f"fraction {fraction} leaves an empty side for {panel.n_assets} assets"
        )
    order = np.random.default_rng(seed).permutation(panel.n_assets)
    return (
        _subpanel_assets(panel, np.sort(order[:k])),
        _subpanel_assets(panel, np.sort(order[k:])),
    )


def _split_by_period(panel: Panel, fraction: float) -> tuple[Panel, Panel]:
    if panel.n_periods < 2:
        raise DegenerateSplitError("by_period split needs >= 2 timestamps")
    cut = int(np.floor(fraction * panel.n_periods))
    if cut == 0 or cut == panel.n_periods:
        raise DegenerateSplitError(
            f"fraction {fraction} leaves an empty side for {panel.n_periods} timestamps"
        )
    return _subpanel_periods(panel, 0, cut), _subpanel_periods(panel, cut, panel.n_periods)


def partition(panel: Panel, spec: PartitionSpec):
    """Split a panel along assets and/or time.

    Plain modes return ``(subset_a, subset_b)``. Nested modes apply the
    second split within each first-level subset and return
    ``((a1, a2), (b1, b2))``; the same fraction and a derived seed are used
    for the inner split.
    """
    if spec.mode == "by_asset":
        return _split_by_asset(panel, spec.split_fraction, spec.seed)
    if spec.mode == "by_period":
        return _split_by_period(panel, spec.split_fraction)
    if spec.mode == "by_asset_then_period":
        a, b = _split_by_asset(panel, spec.split_fraction, spec.seed)
        return _split_by_period(a, spec.split_fraction), _split_by_period(
            b, spec.split_fraction
        )
    a, b = _split_by_period(panel, spec.split_fraction)
    return (
        _split_by_asset(a, spec.split_fraction, spec.seed),
        _split_by_asset(b, spec.split_fraction, spec.seed + 1),
    )


def inject_noise(
    panel: Panel, amplitude: float = 1e-13, seed: int = 0, max_retries: int = 100
) -> Panel:
    """Perturb every return by uniform noise in [-amplitude, +amplitude].

    Cells that still collide with another cell anywhere in the panel are
    re-perturbed (from their original value, so the amplitude bound stays
    tight) until no two cells share an exact value.
    """
    if amplitude <= 0:
        raise ValidationError("amplitude must be positive")
    rng = np.random.default_rng(seed)
    base = panel.matrix
    out = base + rng.uniform(-amplitude, amplitude, size=base.shape)
    for _ in range(max_retries):
        flat = out.ravel()
        _, inverse, counts = np.unique(flat, return_inverse=True, return_counts=True)
        dup = counts[inverse] > 1
        if not dup.any():
            break
        redo = dup.reshape(base.shape)
        out[redo] = base[redo] + rng.uniform(-amplitude, amplitude, size=int(redo.sum()))
    else:
        raise DuplicateNoiseError(
            f"duplicates persisted after {max_retries} resampling rounds"
        )
    return Panel(panel.asset_ids, panel.timestamps, out)
