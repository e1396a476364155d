"""ROC-AUC scoring, the challenge protocol, real-only control experiments,
and the generators x detectors comparison matrix.

The challenge: fit a generator on the full real panel, simulate a panel of
the same shape, split both by asset, train a detector on balanced labeled
segments from the training halves, and report its AUC on segments from the
held-out halves. Real segments are label 0, simulated label 1, so high AUC
means easily detected, i.e. a poor simulator.
"""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .detectors import score_detector, train_detector
from .errors import ValidationError
from .generators.base import Generator
from .panel import (
    LABEL_REAL,
    LABEL_SIMULATED,
    Panel,
    PartitionSpec,
    Segment,
    extract_segments,
    partition,
)
from .seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RocResult:
    auc: float
    points: np.ndarray  # (m, 2) of (false-positive rate, true-positive rate)
    n_pos: int
    n_neg: int


@dataclass(frozen=True)
class ChallengeConfig:
    segment_length: int = 260
    segments_per_class: int = 1000  # paper-scale 6000 is one flag away
    split_fraction: float = 0.5
    seed: int = 0
    sim_assets: int | None = None  # default: match the real panel
    sim_length: int | None = None


@dataclass
class ChallengeResult:
    generator: str
    detector: str
    auc: float
    roc: RocResult
    scores: np.ndarray
    labels: np.ndarray
    config: ChallengeConfig
    train_segments: list[Segment]
    test_segments: list[Segment]
    train_origins: list[tuple[str, str, int]]  # (class, asset_id, start)
    test_origins: list[tuple[str, str, int]]
    real_test_fingerprint: str
    elapsed_seconds: float


@dataclass
class CompareReport:
    generators: list[str]
    detectors: list[str]
    cells: dict[tuple[str, str], ChallengeResult] = field(default_factory=dict)
    failures: dict[tuple[str, str], str] = field(default_factory=dict)

    def auc(self, generator: str, detector: str) -> float | None:
        cell = self.cells.get((generator, detector))
        return None if cell is None else cell.auc


def roc_auc(scores, labels) -> RocResult:
    """AUC via the rank statistic (ties get average ranks, counting 1/2)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValidationError("scores and labels must have equal length")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("both classes must be present to compute AUC")
    ranks = rankdata(scores, method="average")
    auc = (ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    order = np.argsort(-scores, kind="stable")
    y_sorted = labels[order]
    tps = np.cumsum(y_sorted == 1)
    fps = np.cumsum(y_sorted == 0)
    block_ends = np.flatnonzero(np.diff(scores[order]) != 0)
    idx = np.concatenate([block_ends, [len(scores) - 1]])
    points = np.vstack(
        [[0.0, 0.0], np.column_stack([fps[idx] / n_neg, tps[idx] / n_pos])]
    )
    return RocResult(auc=float(auc), points=points, n_pos=n_pos, n_neg=n_neg)


def _fingerprint(segments: list[Segment]) -> str:
    digest = hashlib.sha256()
    for seg in segments:
        digest.update(seg.asset_id.encode())
        digest.update(np.int64(seg.start).tobytes())
        digest.update(np.ascontiguousarray(seg.values).tobytes())
    return digest.hexdigest()


def _origins(segments: list[Segment], side: str) -> list[tuple[str, str, int]]:
    return [(side, s.asset_id, s.start) for s in segments]


@dataclass
class _SegmentSets:
    train: list[Segment]
    test: list[Segment]


def _class_segments(
    panel: Panel, config: ChallengeConfig, label: int, seed: int, tag: str
) -> _SegmentSets:
    """Split one class's panel by asset and extract train/test segments."""
    spec = PartitionSpec("by_asset", config.split_fraction, derive_seed(seed, f"{tag}-split"))
    train_panel, test_panel = partition(panel, spec)
    train = extract_segments(
        train_panel,
        config.segment_length,
        config.segments_per_class,
        derive_seed(seed, f"{tag}-train-extract"),
        label=label,
    )
    test = extract_segments(
        test_panel,
        config.segment_length,
        config.segments_per_class,
        derive_seed(seed, f"{tag}-test-extract"),
        label=label,
    )
    return _SegmentSets(train=train, test=test)


def _score_cell(
    detector_name: str,
    real: _SegmentSets,
    sim: _SegmentSets,
    config: ChallengeConfig,
    generator_name: str,
    started: float,
) -> ChallengeResult:
    train_segments = real.train + sim.train
    test_segments = real.test + sim.test
    detector = train_detector(
        detector_name,
        train_segments,
        seed=derive_seed(config.seed, f"detector-{generator_name}-{detector_name}"),
    )
    scores = score_detector(detector, test_segments)
    labels = np.array([s.label for s in test_segments])
    roc = roc_auc(scores, labels)
    return ChallengeResult(
        generator=generator_name,
        detector=detector_name,
        auc=roc.auc,
        roc=roc,
        scores=scores,
        labels=labels,
        config=config,
        train_segments=train_segments,
        test_segments=test_segments,
        train_origins=_origins(real.train, "real") + _origins(sim.train, "sim"),
        test_origins=_origins(real.test, "real") + _origins(sim.test, "sim"),
        real_test_fingerprint=_fingerprint(real.test),
        elapsed_seconds=time.perf_counter() - started,
    )


def _simulated_sets(
    generator: Generator, real: Panel, config: ChallengeConfig, sim_seed: int
) -> _SegmentSets:
    sim_panel = generator.simulate(
        config.sim_assets or real.n_assets,
        config.sim_length or real.n_periods,
        sim_seed,
    )
    return _class_segments(sim_panel, config, LABEL_SIMULATED, config.seed, "sim")


def run_challenge(
    real: Panel,
    generator: Generator,
    detector_name: str,
    config: ChallengeConfig | None = None,
    fit: bool = True,
) -> ChallengeResult:
    """Full protocol for one (generator, detector) pair.

    The generator is fitted on the whole real panel; detector training and
    testing use disjoint asset halves within each class.
    """
    config = config or ChallengeConfig()
    started = time.perf_counter()
    if fit:
        generator.fit(real)
    real_sets = _class_segments(real, config, LABEL_REAL, config.seed, "real")
    sim_sets = _simulated_sets(
        generator, real, config, derive_seed(config.seed, "simulate")
    )
    name = getattr(generator, "name", type(generator).__name__)
    return _score_cell(detector_name, real_sets, sim_sets, config, name, started)


def run_control_experiment(
    real: Panel,
    experiment: int,
    detector_name: str,
    config: ChallengeConfig | None = None,
) -> ChallengeResult:
    """Real-data-only calibration runs; no generator is ever invoked.

    1: classes = two time periods; train and test drawn from the same pools.
    2: classes = two time periods; within each, disjoint asset halves for
       train vs test.
    3: classes = two asset subsets; train and test drawn from the same pools.
    4: classes = two asset subsets; within each, first period half trains,
       second half tests.
    """
    config = config or ChallengeConfig()
    started = time.perf_counter()
    seed = config.seed
    if experiment not in (1, 2, 3, 4):
        raise ValidationError("experiment must be 1, 2, 3 or 4")

    mode = "by_period" if experiment in (1, 2) else "by_asset"
    class_a, class_b = partition(
        real, PartitionSpec(mode, config.split_fraction, derive_seed(seed, "class-split"))
    )

    def same_pool_sets(panel: Panel, label: int, tag: str) -> _SegmentSets:
        train = extract_segments(
            panel, config.segment_length, config.segments_per_class,
            derive_seed(seed, f"{tag}-train-extract"), label=label,
        )
        test = extract_segments(
            panel, config.segment_length, config.segments_per_class,
            derive_seed(seed, f"{tag}-test-extract"), label=label,
        )
        return _SegmentSets(train=train, test=test)

    def split_pool_sets(panel: Panel, label: int, tag: str, inner_mode: str) -> _SegmentSets:
        inner = PartitionSpec(
            inner_mode, config.split_fraction, derive_seed(seed, f"{tag}-inner-split")
        )
        train_panel, test_panel = partition(panel, inner)
        train = extract_segments(
            train_panel, config.segment_length, config.segments_per_class,
            derive_seed(seed, f"{tag}-train-extract"), label=label,
        )
        test = extract_segments(
            test_panel, config.segment_length, config.segments_per_class,
            derive_seed(seed, f"{tag}-test-extract"), label=label,
        )
        return _SegmentSets(train=train, test=test)

    if experiment in (1, 3):
        sets_a = same_pool_sets(class_a, LABEL_REAL, "class-a")
        sets_b = same_pool_sets(class_b, LABEL_SIMULATED, "class-b")
    elif experiment == 2:
        sets_a = split_pool_sets(class_a, LABEL_REAL, "class-a", "by_asset")
        sets_b = split_pool_sets(class_b, LABEL_SIMULATED, "class-b", "by_asset")
    else:
        sets_a = split_pool_sets(class_a, LABEL_REAL, "class-a", "by_period")
        sets_b = split_pool_sets(class_b, LABEL_SIMULATED, "class-b", "by_period")

    return _score_cell(
        detector_name, sets_a, sets_b, config, f"experiment-{experiment}", started
    )


def compare_methods(
    real: Panel,
    generators: dict[str, Generator],
    detector_names: list[str],
    config: ChallengeConfig | None = None,
    workers: int = 1,
) -> CompareReport:
    """Cross product of challenges with shared real partitions and segments.

    Cells sharing a detector score identical real test segments; per-cell
    failures are recorded and the remaining cells still complete.
    """
    if not generators or not detector_names:
        raise ValidationError("need at least one generator and one detector")
    config = config or ChallengeConfig()
    report = CompareReport(generators=list(generators), detectors=list(detector_names))
    real_sets = _class_segments(real, config, LABEL_REAL, config.seed, "real")

    sim_sets_by_gen: dict[str, _SegmentSets] = {}
    for gen_name, generator in generators.items():
        try:
            generator.fit(real)
            sim_sets_by_gen[gen_name] = _simulated_sets(
                generator, real, config, derive_seed(config.seed, f"simulate-{gen_name}")
            )
        except Exception as exc:  # cell-level isolation
            logger.warning("generator %s failed: %s", gen_name, exc)
            for det in detector_names:
                report.failures[(gen_name, det)] = f"generator: {exc}"

    def run_cell(gen_name: str, det_name: str):
        started = time.perf_counter()
        try:
            result = _score_cell(
                det_name, real_sets, sim_sets_by_gen[gen_name], config, gen_name, started
            )
            return gen_name, det_name, result, None
        except Exception as exc:
            return gen_name, det_name, None, str(exc)

    cells = [
        (g, d)
        for g in generators
        if g in sim_sets_by_gen
        for d in detector_names
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda cell: run_cell(*cell), cells))
    else:
        outcomes = [run_cell(*cell) for cell in cells]
    for gen_name, det_name, result, error in outcomes:
        if result is not None:
            report.cells[(gen_name, det_name)] = result
        else:
            logger.warning("cell (%s, %s) failed: %s", gen_name, det_name, error)
            report.failures[(gen_name, det_name)] = error
    return report
