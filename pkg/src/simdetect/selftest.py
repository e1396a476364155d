"""End-to-end reproducibility verification.

Builds a deterministic synthetic dataset, runs the same command pipeline
twice, and checks that:

1. every non-manifest artifact is byte-identical across runs;
2. manifests agree up to their creation timestamp;
3. every hash a manifest records matches the artifact on disk;
4. the split pipeline (features -> train -> score -> auc) reproduces the
   monolithic challenge scores and AUC exactly.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

from .generators.garch import GarchParams, simulate_garch
from .io import (
    file_sha256,
    manifests_equivalent,
    read_manifest,
    write_prices_csv,
)
from .panel import PriceSeries
from .seeding import derive_seed

CHALLENGE_SEED = 5


def _demo_prices(path: Path) -> None:
    """Small heteroskedastic panel with dates, written as a long price CSV."""
    params = GarchParams(
        "gjr", omega=2e-6, alpha=0.07, beta=0.88, leverage=0.04, nu=8.0, mu=0.0003
    )
    panel = simulate_garch([params], 8, 700, seed=99)
    dates = pd.bdate_range("2015-01-01", periods=panel.n_periods + 1)
    series = []
    for i, asset_id in enumerate(panel.asset_ids):
        prices = np.concatenate(([1.0], np.cumprod(1.0 + panel.matrix[i])))
        series.append(
            PriceSeries(asset_id=f"demo{i:02d}", timestamps=dates.values, prices=prices)
        )
    write_prices_csv(path, series)


def _run_pipeline(data_dir: Path, out_dir: Path) -> None:
    from .cli import main

    out_dir.mkdir(parents=True, exist_ok=True)
    prices = str(data_dir / "prices.csv")
    panel = str(out_dir / "panel.csv")
    steps = [
        ["ingest", "--prices", prices, "--out", panel],
        ["trends", "--panel", panel, "--min-move", "0.02", "--min-length", "10",
         "--out", str(out_dir / "trends.csv")],
        ["simulate", "--panel", panel, "--method", "gbm", "--seed", "7",
         "--out", str(out_dir / "sim.csv")],
        ["challenge", "--panel", panel, "--method", "gbm", "--detector", "stats_bag",
         "--segment-length", "120", "--segments-per-class", "60",
         "--seed", str(CHALLENGE_SEED), "--out", str(out_dir / "chal")],
        ["features", "--segments", str(out_dir / "chal" / "train.csv"),
         "--family", "stats", "--out", str(out_dir / "train_feats.csv")],
        ["features", "--segments", str(out_dir / "chal" / "test.csv"),
         "--family", "stats", "--out", str(out_dir / "test_feats.csv")],
        ["train", "--features", str(out_dir / "train_feats.csv"),
         "--classifier", "bag",
         "--seed", str(derive_seed(CHALLENGE_SEED, "detector-gbm-stats_bag")),
         "--out", str(out_dir / "model.bin")],
        ["score", "--model", str(out_dir / "model.bin"),
         "--features", str(out_dir / "test_feats.csv"),
         "--out", str(out_dir / "scores.csv")],
        ["auc", "--scores", str(out_dir / "scores.csv"),
         "--key", str(out_dir / "chal" / "key.csv"),
         "--out", str(out_dir / "auc.json")],
    ]
    for step in steps:
        code = main(step)
        if code != 0:
            raise RuntimeError(f"pipeline step {step[0]} exited {code}")


def _artifact_files(root: Path) -> list[Path]:
    return sorted(p for p in root.rglob("*") if p.is_file())


def run_selftest(workdir: Path | None = None) -> bool:
    """Run all checks; prints one PASS/FAIL line per check."""
    created = None
    if workdir is None:
        created = tempfile.TemporaryDirectory(prefix="simdetect-selftest-")
        workdir = Path(created.name)
    workdir = Path(workdir)
    all_ok = True

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal all_ok
        all_ok = all_ok and ok
        suffix = f"  ({detail})" if detail and not ok else ""
        print(f"{'PASS' if ok else 'FAIL'}  {name}{suffix}")

    data_dir = workdir / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    _demo_prices(data_dir / "prices.csv")

    run1, run2 = workdir / "run1", workdir / "run2"
    _run_pipeline(data_dir, run1)
    _run_pipeline(data_dir, run2)

    # 1. byte identity of non-manifest artifacts
    mismatched = []
    for path1 in _artifact_files(run1):
        relative = path1.relative_to(run1)
        if relative.name.endswith("manifest.json"):
            continue
        path2 = run2 / relative
        if not path2.exists() or path1.read_bytes() != path2.read_bytes():
            mismatched.append(str(relative))
    check("artifacts byte-identical across runs", not mismatched, ", ".join(mismatched))

    # 2. manifests agree up to timestamps
    bad_manifests = []
    for path1 in _artifact_files(run1):
        if not path1.name.endswith("manifest.json"):
            continue
        relative = path1.relative_to(run1)
        path2 = run2 / relative
        if not path2.exists() or not manifests_equivalent(
            read_manifest(path1), read_manifest(path2)
        ):
            bad_manifests.append(str(relative))
    check("manifests equivalent (timestamps excluded)", not bad_manifests,
          ", ".join(bad_manifests))

    # 3. recorded hashes match artifacts on disk
    stale = []
    for manifest_path in _artifact_files(run1):
        if not manifest_path.name.endswith("manifest.json"):
            continue
        manifest = read_manifest(manifest_path)
        base = manifest_path.parent
        for rel, expected in {**manifest.input_hashes, **manifest.output_hashes}.items():
            target = (base / rel).resolve()
            if not target.exists() or file_sha256(target) != expected:
                stale.append(f"{manifest_path.name}:{rel}")
    check("manifest hashes verify against disk", not stale, ", ".join(stale))

    # 4. split pipeline reproduces the monolithic challenge exactly
    chal_scores = (run1 / "chal" / "scores.csv").read_bytes()
    split_scores = (run1 / "scores.csv").read_bytes()
    with open(run1 / "chal" / "result.json") as handle:
        chal_auc = json.load(handle)["auc"]
    with open(run1 / "auc.json") as handle:
        split_auc = json.load(handle)["auc"]
    check("split pipeline reproduces challenge scores", chal_scores == split_scores)
    check("split pipeline reproduces challenge AUC", chal_auc == split_auc,
          f"{chal_auc} vs {split_auc}")

    if created is not None:
        created.cleanup()
    return all_ok
