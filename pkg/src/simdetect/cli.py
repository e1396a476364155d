"""Command-line surface.

Commands: ingest, trends, simulate, extract, challenge, experiment,
features, train, score, auc, compare, selftest. Every command writes a
manifest with content hashes of its inputs and outputs.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O
error. ``--config FILE`` supplies defaults for any flag (flags win);
``SIMDETECT_DATA_DIR`` resolves relative data paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .detectors import DETECTORS, DetectorSpec, FittedDetector, train_classifier
from .detectors import score_feature_matrix
from .errors import NumericalError, SimdetectError, ValidationError
from .eval import (
    ChallengeConfig,
    ChallengeResult,
    compare_methods,
    roc_auc,
    run_challenge,
    run_control_experiment,
)
from .features import feature_matrix
from .generators import GENERATOR_IDS, make_generator
from .io import (
    LABEL_CODES,
    Manifest,
    align_panel,
    file_sha256,
    read_features_csv,
    read_key_csv,
    read_panel_csv,
    read_prices_csv,
    read_scores_csv,
    read_segments_csv,
    segment_ids,
    write_features_csv,
    write_key_csv,
    write_panel_csv,
    write_scores_csv,
    write_segments_csv,
    write_trends_csv,
)
from .panel import extract_segments, inject_noise
from .seeding import derive_seed
from .store import load_detector, save_detector
from .trends import equal_weight_index, segment_trends

CONFIG_KEYS = {
    "panel", "prices", "out", "seed", "segment_length", "segments_per_class",
    "split_fraction", "method", "methods", "detector", "detectors", "assets",
    "length", "n", "window", "min_move", "min_length", "min_coverage",
    "family", "classifier", "workers", "amplitude", "label", "noise",
}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(_resolve_input(path)) as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    unknown = set(config) - CONFIG_KEYS
    if unknown:
        raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
    return config


def _resolve_input(path: str) -> str:
    """Relative inputs fall back to SIMDETECT_DATA_DIR when not found locally."""
    p = Path(path)
    if p.is_absolute() or p.exists():
        return str(p)
    base = os.environ.get("SIMDETECT_DATA_DIR")
    if base and (Path(base) / p).exists():
        return str(Path(base) / p)
    return str(p)


def _pick(args, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _emit_manifest(path, command: str, config: dict, seeds: dict,
                   inputs: list, outputs: list, extras: dict | None = None) -> None:
    from .io import write_manifest

    base = Path(path).parent

    def rel(p) -> str:
        return os.path.relpath(p, base)

    manifest = Manifest(
        command=command,
        config=config,
        seeds=seeds,
        input_hashes={rel(p): file_sha256(p) for p in inputs},
        output_hashes={rel(p): file_sha256(p) for p in outputs},
        extras=extras or {},
    )
    write_manifest(path, manifest)


# ------------------------------------------------------------- commands

def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    prices_path = _resolve_input(_pick(args, config, "prices"))
    out = Path(_pick(args, config, "out"))
    min_coverage = float(_pick(args, config, "min_coverage", 0.9))
    series = read_prices_csv(prices_path)
    panel, report = align_panel(series, min_coverage)
    write_panel_csv(out, panel)
    report_path = str(out) + ".report.json"
    _write_json(report_path, report)
    _emit_manifest(
        str(out) + ".manifest.json", "ingest",
        {"min_coverage": min_coverage}, {},
        [prices_path], [out, report_path], extras=report,
    )
    print(f"panel: {panel.n_assets} assets x {panel.n_periods} returns -> {out}")
    if report["dropped"]:
        print(f"dropped below coverage: {', '.join(report['dropped'])}")
    return 0


def cmd_trends(args) -> int:
    config = _load_config(args.config)
    panel_path = _resolve_input(_pick(args, config, "panel"))
    out = Path(_pick(args, config, "out"))
    min_move = float(_pick(args, config, "min_move", 0.10))
    min_length = int(_pick(args, config, "min_length", 15))
    panel = read_panel_csv(panel_path)
    segmentation = segment_trends(equal_weight_index(panel), min_move, min_length)
    write_trends_csv(out, segmentation.intervals)
    _emit_manifest(
        str(out) + ".manifest.json", "trends",
        {"min_move": min_move, "min_length": min_length}, {},
        [panel_path], [out],
        extras={"n_trends": len(segmentation)},
    )
    print(f"{len(segmentation)} trends -> {out}")
    return 0


def _generator_kwargs(args, config, method: str) -> dict:
    kwargs = {}
    if method in ("m1", "m2"):
        kwargs["min_move"] = float(_pick(args, config, "min_move", 0.10))
        kwargs["min_length"] = int(_pick(args, config, "min_length", 15))
    if method == "m1":
        kwargs["window"] = int(_pick(args, config, "window", 20))
    return kwargs


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    panel_path = _resolve_input(_pick(args, config, "panel"))
    out = Path(_pick(args, config, "out"))
    method = _pick(args, config, "method")
    seed = int(_pick(args, config, "seed", 0))
    panel = read_panel_csv(panel_path)
    n_assets = int(_pick(args, config, "assets", panel.n_assets))
    length = int(_pick(args, config, "length", panel.n_periods))
    generator = make_generator(method, **_generator_kwargs(args, config, method))
    generator.fit(panel)
    simulated = generator.simulate(n_assets, length, derive_seed(seed, "simulate"))
    write_panel_csv(out, simulated)
    extras = {}
    if hasattr(generator, "last_floor_hits"):
        extras["floor_hits"] = generator.last_floor_hits
    _emit_manifest(
        str(out) + ".manifest.json", "simulate",
        {"method": method, "assets": n_assets, "length": length},
        {"master": seed, "simulate": derive_seed(seed, "simulate")},
        [panel_path], [out], extras=extras,
    )
    print(f"{method}: {n_assets} assets x {length} returns -> {out}")
    return 0


def cmd_extract(args) -> int:
    config = _load_config(args.config)
    panel_path = _resolve_input(_pick(args, config, "panel"))
    out = Path(_pick(args, config, "out"))
    seed = int(_pick(args, config, "seed", 0))
    length = int(_pick(args, config, "length", 260))
    n = int(_pick(args, config, "n", 1000))
    label_name = _pick(args, config, "label")
    label = LABEL_CODES[label_name] if label_name else None
    noise = bool(_pick(args, config, "noise", False))
    amplitude = float(_pick(args, config, "amplitude", 1e-13))
    panel = read_panel_csv(panel_path)
    if noise:
        panel = inject_noise(panel, amplitude, derive_seed(seed, "noise"))
    segments = extract_segments(
        panel, length, n, derive_seed(seed, "extract"), label=label
    )
    write_segments_csv(out, segments)
    _emit_manifest(
        str(out) + ".manifest.json", "extract",
        {"length": length, "n": n, "label": label_name, "noise": noise},
        {"master": seed, "extract": derive_seed(seed, "extract")},
        [panel_path], [out],
    )
    print(f"{n} segments of {length} -> {out}")
    return 0


def cmd_features(args) -> int:
    config = _load_config(args.config)
    segments_path = _resolve_input(_pick(args, config, "segments"))
    out = Path(_pick(args, config, "out"))
    family = _pick(args, config, "family")
    ids, segments = read_segments_csv(segments_path)
    features = feature_matrix(segments, family)
    write_features_csv(out, features, ids=ids)
    _emit_manifest(
        str(out) + ".manifest.json", "features",
        {"family": family}, {},
        [segments_path], [out, str(out) + ".meta.json"],
    )
    print(f"{family}: {features.values.shape[0]} x {features.values.shape[1]} -> {out}")
    return 0


def cmd_train(args) -> int:
    config = _load_config(args.config)
    features_path = _resolve_input(_pick(args, config, "features"))
    out = Path(_pick(args, config, "out"))
    classifier = _pick(args, config, "classifier")
    seed = int(_pick(args, config, "seed", 0))
    _, features = read_features_csv(features_path)
    if features.labels is None:
        raise ValidationError("training features must carry labels")
    model = train_classifier(classifier, features.values, features.labels, seed)
    spec = DetectorSpec(f"{features.family}_{classifier}", features.family, classifier)
    save_detector(out, FittedDetector(spec=spec, model=model))
    _emit_manifest(
        str(out) + ".manifest.json", "train",
        {"classifier": classifier, "family": features.family},
        {"master": seed},
        [features_path, features_path + ".meta.json"], [out],
    )
    print(f"{spec.name} trained on {len(features)} rows -> {out}")
    return 0


def cmd_score(args) -> int:
    config = _load_config(args.config)
    model_path = _resolve_input(_pick(args, config, "model"))
    features_path = _resolve_input(_pick(args, config, "features"))
    out = Path(_pick(args, config, "out"))
    detector = load_detector(model_path)
    ids, features = read_features_csv(features_path)
    scores = score_feature_matrix(detector, features)
    write_scores_csv(out, ids, scores)
    _emit_manifest(
        str(out) + ".manifest.json", "score",
        {"detector": detector.spec.name}, {},
        [model_path, features_path], [out],
    )
    print(f"{len(scores)} scores -> {out}")
    return 0


def cmd_auc(args) -> int:
    config = _load_config(args.config)
    scores_path = _resolve_input(_pick(args, config, "scores"))
    key_path = _resolve_input(_pick(args, config, "key"))
    out = Path(_pick(args, config, "out"))
    score_ids, scores = read_scores_csv(scores_path)
    key_ids, labels = read_key_csv(key_path)
    lookup = dict(zip(key_ids, labels))
    missing = [sid for sid in score_ids if sid not in lookup]
    if missing:
        raise ValidationError(f"scores reference ids missing from key: {missing[:5]}")
    aligned = np.array([lookup[sid] for sid in score_ids])
    roc = roc_auc(scores, aligned)
    _write_json(out, {"auc": roc.auc, "n_pos": roc.n_pos, "n_neg": roc.n_neg})
    if args.roc_points:
        with open(args.roc_points, "w") as handle:
            handle.write("fpr,tpr\n")
            for fpr, tpr in roc.points:
                handle.write(f"{repr(float(fpr))},{repr(float(tpr))}\n")
    outputs = [out] + ([args.roc_points] if args.roc_points else [])
    _emit_manifest(
        str(out) + ".manifest.json", "auc", {}, {},
        [scores_path, key_path], outputs,
    )
    print(f"auc {roc.auc:.6f} ({roc.n_pos} pos / {roc.n_neg} neg)")
    return 0


def _challenge_config(args, config) -> ChallengeConfig:
    return ChallengeConfig(
        segment_length=int(_pick(args, config, "segment_length", 260)),
        segments_per_class=int(_pick(args, config, "segments_per_class", 1000)),
        split_fraction=float(_pick(args, config, "split_fraction", 0.5)),
        seed=int(_pick(args, config, "seed", 0)),
    )


def _write_bundle(outdir: Path, result: ChallengeResult) -> list[str]:
    train_path = outdir / "train.csv"
    test_path = outdir / "test.csv"
    key_path = outdir / "key.csv"
    scores_path = outdir / "scores.csv"
    result_path = outdir / "result.json"
    write_segments_csv(train_path, result.train_segments, with_labels=True)
    write_segments_csv(test_path, result.test_segments, with_labels=False)
    ids = segment_ids(len(result.test_segments))
    write_key_csv(key_path, ids, result.labels)
    write_scores_csv(scores_path, ids, result.scores)
    _write_json(
        result_path,
        {
            "generator": result.generator,
            "detector": result.detector,
            "auc": result.auc,
            "n_pos": result.roc.n_pos,
            "n_neg": result.roc.n_neg,
            "config": asdict(result.config),
            "real_test_fingerprint": result.real_test_fingerprint,
        },
    )
    return [str(p) for p in (train_path, test_path, key_path, scores_path, result_path)]


def cmd_challenge(args) -> int:
    config = _load_config(args.config)
    panel_path = _resolve_input(_pick(args, config, "panel"))
    outdir = Path(_pick(args, config, "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    method = _pick(args, config, "method")
    detector = _pick(args, config, "detector")
    challenge_config = _challenge_config(args, config)
    panel = read_panel_csv(panel_path)
    generator = make_generator(method, **_generator_kwargs(args, config, method))
    result = run_challenge(panel, generator, detector, challenge_config)
    outputs = _write_bundle(outdir, result)
    _emit_manifest(
        outdir / "manifest.json", "challenge",
        {"method": method, "detector": detector, **asdict(challenge_config)},
        {"master": challenge_config.seed},
        [panel_path], outputs,
    )
    print(f"challenge {method} vs {detector}: auc {result.auc:.4f}")
    return 0


def cmd_experiment(args) -> int:
    config = _load_config(args.config)
    panel_path = _resolve_input(_pick(args, config, "panel"))
    outdir = Path(_pick(args, config, "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    detector = _pick(args, config, "detector")
    experiment = int(args.id)
    challenge_config = _challenge_config(args, config)
    panel = read_panel_csv(panel_path)
    result = run_control_experiment(panel, experiment, detector, challenge_config)
    outputs = _write_bundle(outdir, result)
    _emit_manifest(
        outdir / "manifest.json", "experiment",
        {"id": experiment, "detector": detector, **asdict(challenge_config)},
        {"master": challenge_config.seed},
        [panel_path], outputs,
    )
    print(f"experiment {experiment} vs {detector}: auc {result.auc:.4f}")
    return 0


def cmd_compare(args) -> int:
    config = _load_config(args.config)
    panel_path = _resolve_input(_pick(args, config, "panel"))
    outdir = Path(_pick(args, config, "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    methods = _pick(args, config, "methods")
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    detectors = _pick(args, config, "detectors")
    if isinstance(detectors, str):
        detectors = [d.strip() for d in detectors.split(",") if d.strip()]
    workers = int(_pick(args, config, "workers", 1))
    challenge_config = _challenge_config(args, config)
    panel = read_panel_csv(panel_path)
    generators = {
        m: make_generator(m, **_generator_kwargs(args, config, m)) for m in methods
    }
    report = compare_methods(panel, generators, detectors, challenge_config, workers)

    matrix_path = outdir / "report.csv"
    with open(matrix_path, "w") as handle:
        handle.write("detector," + ",".join(methods) + "\n")
        for det in detectors:
            cells = []
            for m in methods:
                auc = report.auc(m, det)
                cells.append("" if auc is None else repr(auc))
            handle.write(det + "," + ",".join(cells) + "\n")
    summary_path = outdir / "report.txt"
    with open(summary_path, "w") as handle:
        handle.write(f"comparison on {panel_path}\n")
        for det in detectors:
            for m in methods:
                auc = report.auc(m, det)
                text = "failed" if auc is None else f"{auc:.4f}"
                handle.write(f"{det:>16s} vs {m:<8s} auc {text}\n")
        if report.failures:
            handle.write("failures:\n")
            for (m, det), message in sorted(report.failures.items()):
                handle.write(f"  ({m}, {det}): {message}\n")
    if args.roc_dumps:
        for (m, det), cell in sorted(report.cells.items()):
            path = outdir / f"roc_{m}_{det}.csv"
            with open(path, "w") as handle:
                handle.write("fpr,tpr\n")
                for fpr, tpr in cell.roc.points:
                    handle.write(f"{repr(float(fpr))},{repr(float(tpr))}\n")
    _emit_manifest(
        outdir / "manifest.json", "compare",
        {"methods": methods, "detectors": detectors, **asdict(challenge_config)},
        {"master": challenge_config.seed},
        [panel_path], [matrix_path, summary_path],
        extras={"failures": {f"{m}/{d}": msg for (m, d), msg in report.failures.items()}},
    )
    print(open(summary_path).read().rstrip())
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    workdir = Path(args.workdir) if args.workdir else None
    ok = run_selftest(workdir)
    return 0 if ok else 3


# ------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simdetect",
        description="Benchmark return-series simulators with classifier two-sample tests.",
    )
    parser.add_argument("--version", action="version", version=f"simdetect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file supplying defaults for flags")
        p.set_defaults(handler=handler)
        return p

    p = add("ingest", cmd_ingest, "align a long price CSV into a returns panel")
    p.add_argument("--prices")
    p.add_argument("--out")
    p.add_argument("--min-coverage", dest="min_coverage", type=float)

    p = add("trends", cmd_trends, "export the equal-weight index trend segmentation")
    p.add_argument("--panel")
    p.add_argument("--out")
    p.add_argument("--min-move", dest="min_move", type=float)
    p.add_argument("--min-length", dest="min_length", type=int)

    p = add("simulate", cmd_simulate, "fit a generator and write a simulated panel")
    p.add_argument("--panel")
    p.add_argument("--method", choices=GENERATOR_IDS)
    p.add_argument("--assets", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--window", type=int)
    p.add_argument("--min-move", dest="min_move", type=float)
    p.add_argument("--min-length", dest="min_length", type=int)

    p = add("extract", cmd_extract, "draw random labeled segments from a panel")
    p.add_argument("--panel")
    p.add_argument("--length", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--label", choices=["real", "simulated"])
    p.add_argument("--noise", action="store_const", const=True)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--out")

    p = add("features", cmd_features, "compute one feature family on segments")
    p.add_argument("--segments")
    p.add_argument("--family", choices=["acf", "acf_abs", "stats", "sorted", "reoccurrence"])
    p.add_argument("--out")

    p = add("train", cmd_train, "train a classifier on labeled features")
    p.add_argument("--features")
    p.add_argument("--classifier", choices=["knn", "bag", "gboost"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("score", cmd_score, "score features with a trained model")
    p.add_argument("--model")
    p.add_argument("--features")
    p.add_argument("--out")

    p = add("auc", cmd_auc, "ROC-AUC of scores against an answer key")
    p.add_argument("--scores")
    p.add_argument("--key")
    p.add_argument("--out")
    p.add_argument("--roc-points", dest="roc_points")

    p = add("challenge", cmd_challenge, "full protocol for one generator/detector pair")
    p.add_argument("--panel")
    p.add_argument("--method", choices=GENERATOR_IDS)
    p.add_argument("--detector", choices=sorted(DETECTORS))
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--segment-length", dest="segment_length", type=int)
    p.add_argument("--segments-per-class", dest="segments_per_class", type=int)
    p.add_argument("--split-fraction", dest="split_fraction", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--min-move", dest="min_move", type=float)
    p.add_argument("--min-length", dest="min_length", type=int)

    p = add("experiment", cmd_experiment, "real-data-only control experiment 1..4")
    p.add_argument("--panel")
    p.add_argument("--id", required=True, type=int, choices=[1, 2, 3, 4])
    p.add_argument("--detector", choices=sorted(DETECTORS))
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--segment-length", dest="segment_length", type=int)
    p.add_argument("--segments-per-class", dest="segments_per_class", type=int)
    p.add_argument("--split-fraction", dest="split_fraction", type=float)

    p = add("compare", cmd_compare, "generators x detectors AUC matrix")
    p.add_argument("--panel")
    p.add_argument("--methods")
    p.add_argument("--detectors")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--segment-length", dest="segment_length", type=int)
    p.add_argument("--segments-per-class", dest="segments_per_class", type=int)
    p.add_argument("--split-fraction", dest="split_fraction", type=float)
    p.add_argument("--min-move", dest="min_move", type=float)
    p.add_argument("--min-length", dest="min_length", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--roc-dumps", dest="roc_dumps", action="store_true")

    p = add("selftest", cmd_selftest, "verify byte-level reproducibility end to end")
    p.add_argument("--workdir")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except SimdetectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
