"""File formats and run manifests.

Formats (all CSV, headers mandatory):

- prices:   ``date,asset_id,price`` long form, ISO-8601 dates
- panel:    first column ``date``, one return column per asset id
- segments: ``segment_id,label,r1..rN`` (label empty when unlabeled)
- features: ``segment_id,label,f1..fK`` plus a JSON sidecar naming the family
- scores:   ``segment_id,score``

Every command records a Manifest (JSON) with content hashes of its inputs
and outputs, the seeds and config snapshot, so any artifact can be verified
and reproduced. Timestamps live in one field that reproducibility checks
ignore.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .errors import ValidationError
from .features import FAMILY_DIMS, FeatureMatrix
from .panel import LABEL_REAL, LABEL_SIMULATED, Panel, PriceSeries, Segment, to_returns

LABEL_NAMES = {LABEL_REAL: "real", LABEL_SIMULATED: "simulated"}
LABEL_CODES = {"real": LABEL_REAL, "simulated": LABEL_SIMULATED}


# ---------------------------------------------------------------- hashing

def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


# ---------------------------------------------------------------- manifest

@dataclass
class Manifest:
    command: str
    config: dict
    seeds: dict
    input_hashes: dict = field(default_factory=dict)
    output_hashes: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    version: str = __version__
    format_version: int = 1
    created_utc: str = ""  # excluded from reproducibility comparisons


def write_manifest(path, manifest: Manifest) -> None:
    manifest.created_utc = datetime.now(timezone.utc).isoformat()
    payload = asdict(manifest)
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_manifest(path) -> Manifest:
    with open(path) as handle:
        payload = json.load(handle)
    return Manifest(**payload)


def manifests_equivalent(a: Manifest, b: Manifest) -> bool:
    """Equality ignoring the creation timestamp."""
    da, db = asdict(a), asdict(b)
    da.pop("created_utc"), db.pop("created_utc")
    return da == db


# ---------------------------------------------------------------- prices

def read_prices_csv(path) -> list[PriceSeries]:
    """Parse the long price format with line-numbered error messages."""
    frame = pd.read_csv(path, dtype=str)
    expected = ["date", "asset_id", "price"]
    if list(frame.columns) != expected:
        raise ValidationError(f"{path}: header must be {','.join(expected)}")
    prices = pd.to_numeric(frame["price"], errors="coerce")
    bad = prices.isna() | (prices <= 0)
    if bad.any():
        line = int(np.flatnonzero(bad.values)[0]) + 2  # 1-based, after header
        raise ValidationError(
            f"{path}:{line}: invalid price {frame['price'].iloc[line - 2]!r}"
        )
    dates = pd.to_datetime(frame["date"], format="ISO8601", errors="coerce")
    if dates.isna().any():
        line = int(np.flatnonzero(dates.isna().values)[0]) + 2
        raise ValidationError(
            f"{path}:{line}: invalid ISO date {frame['date'].iloc[line - 2]!r}"
        )
    series = []
    for asset_id, group in frame.assign(date=dates, price=prices).groupby(
        "asset_id", sort=True
    ):
        group = group.sort_values("date")
        if group["date"].duplicated().any():
            raise ValidationError(f"{path}: duplicate dates for asset {asset_id}")
        series.append(
            PriceSeries(
                asset_id=str(asset_id),
                timestamps=group["date"].values,
                prices=group["price"].values,
            )
        )
    if not series:
        raise ValidationError(f"{path}: no price rows")
    return series


def write_prices_csv(path, series_list: list[PriceSeries]) -> None:
    rows = []
    for ps in series_list:
        dates = pd.to_datetime(ps.timestamps)
        for date, price in zip(dates, ps.prices):
            rows.append((date.date().isoformat(), ps.asset_id, repr(float(price))))
    frame = pd.DataFrame(rows, columns=["date", "asset_id", "price"])
    frame.to_csv(path, index=False)


def align_panel(
    series_list: list[PriceSeries], min_coverage: float = 0.9
) -> tuple[Panel, dict]:
    """Align prices on the union date grid, forward-fill gaps, difference.

    Assets quoted on fewer than ``min_coverage`` of the grid dates are
    dropped; leading gaps (before an asset's first quote) are back-filled
    from its first price. Returns the panel and a drop/fill report.
    """
    if not series_list:
        raise ValidationError("no price series to align")
    frames = {
        ps.asset_id: pd.Series(ps.prices, index=pd.to_datetime(ps.timestamps))
        for ps in series_list
    }
    table = pd.DataFrame(frames).sort_index()
    coverage = table.notna().mean()
    dropped = sorted(coverage.index[coverage < min_coverage])
    kept = [a for a in table.columns if a not in set(dropped)]
    if not kept:
        raise ValidationError("every asset fell below the coverage threshold")
    filled = table[kept].ffill().bfill()
    n_filled = int((table[kept].isna()).sum().sum())
    returns = filled.values.T[:, 1:] / filled.values.T[:, :-1] - 1.0
    panel = Panel(
        asset_ids=tuple(str(a) for a in kept),
        timestamps=table.index.values[1:],
        matrix=returns,
    )
    report = {
        "n_assets_in": len(series_list),
        "n_assets_kept": len(kept),
        "dropped": [str(a) for a in dropped],
        "coverage_threshold": min_coverage,
        "cells_filled": n_filled,
    }
    return panel, report


# ---------------------------------------------------------------- panel

def _timestamp_strings(timestamps: np.ndarray) -> list[str]:
    if np.issubdtype(timestamps.dtype, np.datetime64):
        return [str(t)[:10] for t in timestamps.astype("datetime64[D]")]
    return [str(int(t)) for t in timestamps]


def write_panel_csv(path, panel: Panel) -> None:
    with open(path, "w") as handle:
        handle.write("date," + ",".join(panel.asset_ids) + "\n")
        for label, column in zip(_timestamp_strings(panel.timestamps), panel.matrix.T):
            handle.write(label + "," + ",".join(repr(float(v)) for v in column) + "\n")


def read_panel_csv(path) -> Panel:
    frame = pd.read_csv(path)
    if frame.columns[0] != "date" or frame.shape[1] < 2:
        raise ValidationError(f"{path}: panel header must start with 'date'")
    raw_dates = frame["date"]
    try:
        timestamps = pd.to_datetime(raw_dates, format="ISO8601").values
    except (ValueError, TypeError):
        timestamps = raw_dates.to_numpy(dtype=np.int64)
    return Panel(
        asset_ids=tuple(frame.columns[1:]),
        timestamps=timestamps,
        matrix=frame.iloc[:, 1:].to_numpy(dtype=float).T,
    )


# ---------------------------------------------------------------- segments

def segment_ids(n: int) -> list[str]:
    return [f"seg{i:06d}" for i in range(n)]


def write_segments_csv(path, segments: list[Segment], with_labels: bool = True) -> None:
    if not segments:
        raise ValidationError("no segments to write")
    length = len(segments[0])
    if any(len(s) != length for s in segments):
        raise ValidationError("segments must share one length")
    header = ["segment_id", "label"] + [f"r{i}" for i in range(1, length + 1)]
    with open(path, "w") as handle:
        handle.write(",".join(header) + "\n")
        for sid, seg in zip(segment_ids(len(segments)), segments):
            label = (
                LABEL_NAMES[seg.label] if with_labels and seg.label is not None else ""
            )
            handle.write(
                f"{sid},{label}," + ",".join(repr(float(v)) for v in seg.values) + "\n"
            )


def read_segments_csv(path) -> tuple[list[str], list[Segment]]:
    frame = pd.read_csv(path, dtype={"segment_id": str, "label": str})
    if list(frame.columns[:2]) != ["segment_id", "label"]:
        raise ValidationError(f"{path}: header must start with segment_id,label")
    values = frame.iloc[:, 2:].to_numpy(dtype=float)
    ids, segments = [], []
    for i in range(len(frame)):
        raw_label = frame["label"].iloc[i]
        label = None
        if isinstance(raw_label, str) and raw_label:
            if raw_label not in LABEL_CODES:
                raise ValidationError(f"{path}: unknown label {raw_label!r} (row {i + 2})")
            label = LABEL_CODES[raw_label]
        ids.append(str(frame["segment_id"].iloc[i]))
        segments.append(
            Segment(values=values[i], asset_id=str(frame["segment_id"].iloc[i]), start=0, label=label)
        )
    return ids, segments


def write_key_csv(path, ids: list[str], labels) -> None:
    with open(path, "w") as handle:
        handle.write("segment_id,label\n")
        for sid, label in zip(ids, labels):
            handle.write(f"{sid},{LABEL_NAMES[int(label)]}\n")


def read_key_csv(path) -> tuple[list[str], np.ndarray]:
    frame = pd.read_csv(path, dtype={"segment_id": str, "label": str})
    if list(frame.columns) != ["segment_id", "label"]:
        raise ValidationError(f"{path}: key header must be segment_id,label")
    labels = np.array([LABEL_CODES[v] for v in frame["label"]])
    return list(frame["segment_id"]), labels


# ---------------------------------------------------------------- features

def write_features_csv(path, features: FeatureMatrix, ids: list[str] | None = None) -> None:
    ids = ids if ids is not None else segment_ids(len(features))
    dim = features.values.shape[1]
    header = ["segment_id", "label"] + [f"f{i}" for i in range(1, dim + 1)]
    with open(path, "w") as handle:
        handle.write(",".join(header) + "\n")
        for i, sid in enumerate(ids):
            label = (
                LABEL_NAMES[int(features.labels[i])] if features.labels is not None else ""
            )
            handle.write(
                f"{sid},{label}," + ",".join(repr(float(v)) for v in features.values[i]) + "\n"
            )
    sidecar = {
        "family": features.family,
        "dim": dim,
        "n_rows": len(features),
        "format_version": 1,
    }
    with open(str(path) + ".meta.json", "w") as handle:
        json.dump(sidecar, handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_features_csv(path) -> tuple[list[str], FeatureMatrix]:
    with open(str(path) + ".meta.json") as handle:
        sidecar = json.load(handle)
    family = sidecar["family"]
    if family not in FAMILY_DIMS:
        raise ValidationError(f"{path}: sidecar names unknown family {family!r}")
    frame = pd.read_csv(path, dtype={"segment_id": str, "label": str})
    values = frame.iloc[:, 2:].to_numpy(dtype=float)
    raw_labels = frame["label"]
    labels = None
    if raw_labels.notna().all() and (raw_labels != "").all():
        labels = np.array([LABEL_CODES[v] for v in raw_labels])
    ids = [str(v) for v in frame["segment_id"]]
    return ids, FeatureMatrix(
        family=family,
        values=values,
        segment_ids=ids,
        labels=labels,
        warnings=np.zeros(len(values), dtype=bool),
    )


# ---------------------------------------------------------------- scores

def write_scores_csv(path, ids: list[str], scores) -> None:
    with open(path, "w") as handle:
        handle.write("segment_id,score\n")
        for sid, score in zip(ids, scores):
            handle.write(f"{sid},{repr(float(score))}\n")


def read_scores_csv(path) -> tuple[list[str], np.ndarray]:
    frame = pd.read_csv(path, dtype={"segment_id": str})
    if list(frame.columns) != ["segment_id", "score"]:
        raise ValidationError(f"{path}: scores header must be segment_id,score")
    return list(frame["segment_id"]), frame["score"].to_numpy(dtype=float)


# ---------------------------------------------------------------- trends

def write_trends_csv(path, intervals) -> None:
    with open(path, "w") as handle:
        handle.write("start,end,direction\n")
        for start, end, direction in intervals:
            handle.write(f"{start},{end},{direction}\n")
