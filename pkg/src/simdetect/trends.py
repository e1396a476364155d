"""Ex-post trend segmentation of an equally-weighted market index.

The index's cumulative price path is cut into alternating up/down intervals
with a zig-zag (peak/trough retracement) filter: a trend reverses once the
path retraces more than ``min_move`` (relative) from its running extreme.
Intervals shorter than ``min_length`` are merged away afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .panel import Panel, ReturnSeries, price_path

UP = "up"
DOWN = "down"


@dataclass(frozen=True)
class TrendSegmentation:
    """Alternating trend intervals over return indices [start, end)."""

    intervals: tuple[tuple[int, int, str], ...]
    index_series: ReturnSeries

    def __post_init__(self):
        prev_end, prev_dir = 0, None
        for start, end, direction in self.intervals:
            if start != prev_end or end <= start:
                raise ValidationError("intervals must be contiguous and non-empty")
            if direction == prev_dir:
                raise ValidationError("interval directions must alternate")
            prev_end, prev_dir = end, direction
        if prev_end != len(self.index_series):
            raise ValidationError("intervals must cover the full index")

    def __len__(self) -> int:
        return len(self.intervals)

    def directions(self) -> list[str]:
        return [d for _, _, d in self.intervals]


def equal_weight_index(panel: Panel) -> ReturnSeries:
    """Per-timestamp arithmetic mean of all asset returns."""
    if panel.n_assets == 0 or panel.n_periods == 0:
        raise ValidationError("panel must be non-empty")
    return ReturnSeries("__index__", panel.matrix.mean(axis=0))


def _direction_of(p: np.ndarray, start: int, end: int) -> str:
    # interval over return indices [start, end) spans prices p[start]..p[end]
    return UP if p[end] >= p[start] else DOWN


def _zigzag_pivots(p: np.ndarray, min_move: float) -> list[int]:
    """Pivot indices into the price path, always including 0 and len(p)-1."""
    last = len(p) - 1
    pivots = [0]
    state = 0  # 0 undecided, +1 up, -1 down
    hi = lo = p[0]
    hi_i = lo_i = 0
    for t in range(1, len(p)):
        x = p[t]
        if state == 0:
            if x > hi:
                hi, hi_i = x, t
            if x < lo:
                lo, lo_i = x, t
            if x >= lo * (1.0 + min_move):
                if lo_i > 0:
                    pivots.append(lo_i)
                state, hi, hi_i = 1, x, t
            elif x <= hi * (1.0 - min_move):
                if hi_i > 0:
                    pivots.append(hi_i)
                state, lo, lo_i = -1, x, t
        elif state == 1:
            if x > hi:
                hi, hi_i = x, t
            elif x <= hi * (1.0 - min_move):
                pivots.append(hi_i)
                state, lo, lo_i = -1, x, t
        else:
            if x < lo:
                lo, lo_i = x, t
            elif x >= lo * (1.0 + min_move):
                pivots.append(lo_i)
                state, hi, hi_i = 1, x, t
    if pivots[-1] != last:
        pivots.append(last)
    return pivots


def _merge_short(
    intervals: list[list], p: np.ndarray, min_length: int
) -> list[list]:
    """Absorb sub-minimum intervals into the neighbor with the larger move."""

    def fuse_same_direction(ivs):
        fused = [ivs[0]]
        for iv in ivs[1:]:
            if iv[2] == fused[-1][2]:
                fused[-1] = [fused[-1][0], iv[1], iv[2]]
            else:
                fused.append(iv)
        return fused

    intervals = fuse_same_direction(intervals)
    while len(intervals) > 1:
        lengths = [end - start for start, end, _ in intervals]
        short = [i for i, n in enumerate(lengths) if n < min_length]
        if not short:
            break
        i = min(short, key=lambda j: lengths[j])
        if i == 0:
            j = 1
        elif i == len(intervals) - 1:
            j = i - 1
        else:
            move_prev = abs(p[intervals[i - 1][1]] - p[intervals[i - 1][0]])
            move_next = abs(p[intervals[i + 1][1]] - p[intervals[i + 1][0]])
            j = i - 1 if move_prev >= move_next else i + 1
        a, b = (i, j) if i < j else (j, i)
        start, end = intervals[a][0], intervals[b][1]
        merged = [start, end, _direction_of(p, start, end)]
        intervals = intervals[:a] + [merged] + intervals[b + 1 :]
        intervals = fuse_same_direction(intervals)
    return intervals


def segment_trends(
    index: ReturnSeries, min_move: float = 0.10, min_length: int = 15
) -> TrendSegmentation:
    """Zig-zag segmentation of the index's cumulative price path.

    min_move: relative retracement from a running extreme that triggers a
    reversal. min_length: intervals shorter than this are merged into the
    neighbor with the larger price move (alternation is re-established by
    fusing equal-direction neighbors).
    """
    if min_move <= 0:
        raise ValidationError("min_move must be positive")
    if min_length < 1:
        raise ValidationError("min_length must be >= 1")
    if len(index) < min_length:
        raise ValidationError(
            f"index has {len(index)} returns, need at least min_length={min_length}"
        )
    p = price_path(index.returns)
    pivots = _zigzag_pivots(p, min_move)
    intervals = [
        [pivots[k], pivots[k + 1], _direction_of(p, pivots[k], pivots[k + 1])]
        for k in range(len(pivots) - 1)
    ]
    intervals = _merge_short(intervals, p, min_length)
    return TrendSegmentation(
        intervals=tuple((int(s), int(e), d) for s, e, d in intervals),
        index_series=index,
    )
