"""simdetect: score financial time-series simulators by how easily trained
classifiers can tell their output apart from real return segments."""

__version__ = "0.1.0"

from .ecdf import EmpiricalCdf, ecdf_build, ecdf_eval, ecdf_inverse
from .eval import (
    ChallengeConfig,
    ChallengeResult,
    CompareReport,
    RocResult,
    compare_methods,
    roc_auc,
    run_challenge,
    run_control_experiment,
)
from .panel import (
    LABEL_REAL,
    LABEL_SIMULATED,
    Panel,
    PartitionSpec,
    PriceSeries,
    ReturnSeries,
    Segment,
    extract_segments,
    inject_noise,
    partition,
    to_prices,
    to_returns,
)
from .seeding import derive_seed
from .trends import TrendSegmentation, equal_weight_index, segment_trends

__all__ = [
    "ChallengeConfig",
    "ChallengeResult",
    "CompareReport",
    "EmpiricalCdf",
    "LABEL_REAL",
    "LABEL_SIMULATED",
    "Panel",
    "PartitionSpec",
    "PriceSeries",
    "ReturnSeries",
    "RocResult",
    "Segment",
    "TrendSegmentation",
    "__version__",
    "compare_methods",
    "derive_seed",
    "ecdf_build",
    "ecdf_eval",
    "ecdf_inverse",
    "equal_weight_index",
    "extract_segments",
    "inject_noise",
    "partition",
    "roc_auc",
    "run_challenge",
    "run_control_experiment",
    "segment_trends",
    "to_prices",
    "to_returns",
]
