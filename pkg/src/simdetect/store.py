"""Versioned model archives: one deterministic zip of .npy entries plus a
JSON meta entry describing the model kind and hyperparameters.

Archive bytes are reproducible (fixed zip timestamps, sorted entries), so
model files participate in the byte-identity reproducibility checks.
"""

from __future__ import annotations

import io
import json
import zipfile

import numpy as np

from .detectors import DetectorSpec, FittedDetector
from .ecdf import EmpiricalCdf
from .errors import ValidationError
from .generators.garch import GarchParams
from .generators.sde import SdeParams
from .generators.trendpath import PathTrend, TrendPathModel
from .generators.trendwin import TrendWindowModel, WindowedTrend
from .learn.bagging import BaggedTreesModel
from .learn.boosting import GradientBoostModel
from .learn.knn import KnnEnsembleModel
from .learn.tree import DecisionTree, TreeNode

FORMAT_VERSION = 1
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def _write_archive(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    meta = dict(meta, format_version=FORMAT_VERSION)
    with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as archive:
        info = zipfile.ZipInfo("meta.json", date_time=_ZIP_EPOCH)
        archive.writestr(info, json.dumps(meta, sort_keys=True, indent=2))
        for name in sorted(arrays):
            buffer = io.BytesIO()
            np.lib.format.write_array(
                buffer, np.ascontiguousarray(arrays[name]), allow_pickle=False
            )
            info = zipfile.ZipInfo(name + ".npy", date_time=_ZIP_EPOCH)
            archive.writestr(info, buffer.getvalue())


def _read_archive(path) -> tuple[dict, dict[str, np.ndarray]]:
    arrays = {}
    with zipfile.ZipFile(path) as archive:
        with archive.open("meta.json") as handle:
            meta = json.load(handle)
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValidationError(
                f"{path}: unsupported archive format {meta.get('format_version')!r}"
            )
        for name in archive.namelist():
            if name.endswith(".npy"):
                with archive.open(name) as handle:
                    arrays[name[:-4]] = np.lib.format.read_array(
                        handle, allow_pickle=False
                    )
    return meta, arrays


# ------------------------------------------------------------- tree codecs

def _tree_to_arrays(tree: DecisionTree) -> dict[str, np.ndarray]:
    nodes: list[TreeNode] = []
    stack = [tree.root]
    while stack:
        node = stack.pop()
        nodes.append(node)
        if not node.is_leaf:
            stack.append(node.right)
            stack.append(node.left)
    feature = np.full(len(nodes), -1, dtype=np.int64)
    threshold = np.zeros(len(nodes))
    left = np.full(len(nodes), -1, dtype=np.int64)
    right = np.full(len(nodes), -1, dtype=np.int64)
    value = np.zeros(len(nodes))
    count = np.zeros(len(nodes), dtype=np.int64)
    position = {id(node): i for i, node in enumerate(nodes)}
    for i, node in enumerate(nodes):
        value[i] = node.value
        count[i] = node.n_samples
        if not node.is_leaf:
            feature[i] = node.feature
            threshold[i] = node.threshold
            left[i] = position[id(node.left)]
            right[i] = position[id(node.right)]
    return {
        "feature": feature,
        "threshold": threshold,
        "left": left,
        "right": right,
        "value": value,
        "count": count,
    }


def _tree_from_arrays(arrays: dict[str, np.ndarray], meta: dict) -> DecisionTree:
    nodes = [
        TreeNode(value=float(v), n_samples=int(c))
        for v, c in zip(arrays["value"], arrays["count"])
    ]
    for i, node in enumerate(nodes):
        if arrays["left"][i] >= 0:
            node.feature = int(arrays["feature"][i])
            node.threshold = float(arrays["threshold"][i])
            node.left = nodes[int(arrays["left"][i])]
            node.right = nodes[int(arrays["right"][i])]
    return DecisionTree(
        root=nodes[0],
        max_depth=meta.get("max_depth"),
        min_leaf=meta.get("min_leaf", 1),
        n_features=meta["n_features"],
    )


def _forest_arrays(trees, prefix: str) -> dict[str, np.ndarray]:
    arrays = {}
    for t, tree in enumerate(trees):
        for key, arr in _tree_to_arrays(tree).items():
            arrays[f"{prefix}{t:04d}_{key}"] = arr
    return arrays


def _forest_from_arrays(arrays, meta, prefix: str, n_trees: int) -> list[DecisionTree]:
    trees = []
    for t in range(n_trees):
        sub = {
            key: arrays[f"{prefix}{t:04d}_{key}"]
            for key in ("feature", "threshold", "left", "right", "value", "count")
        }
        trees.append(_tree_from_arrays(sub, meta))
    return trees


# --------------------------------------------------------- detector models

def save_detector(path, detector: FittedDetector) -> None:
    spec = detector.spec
    meta = {"kind": "detector", "name": spec.name, "family": spec.family,
            "classifier": spec.classifier}
    arrays: dict[str, np.ndarray] = {}
    model = detector.model
    if spec.classifier == "knn":
        meta.update(
            n_members=model.n_members,
            subsample_fraction=model.subsample_fraction,
            seed=model.seed,
        )
        for m, (stored, labels) in enumerate(model.members):
            arrays[f"member{m:04d}_x"] = stored
            arrays[f"member{m:04d}_y"] = labels
    elif spec.classifier == "bag":
        meta.update(
            n_trees=len(model.trees),
            n_rows=model.n_rows,
            seed=model.seed,
            n_features=model.trees[0].n_features,
            max_depth=model.trees[0].max_depth,
            min_leaf=model.trees[0].min_leaf,
        )
        arrays.update(_forest_arrays(model.trees, "tree"))
        for t, idx in enumerate(model.bootstrap_indices):
            arrays[f"boot{t:04d}"] = idx
    elif spec.classifier == "gboost":
        meta.update(
            n_trees=len(model.trees),
            init_logodds=model.init_logodds,
            best_round=model.best_round,
            n_features=model.trees[0].n_features if model.trees else 0,
            max_depth=model.trees[0].max_depth if model.trees else 3,
            min_leaf=model.trees[0].min_leaf if model.trees else 1,
        )
        arrays.update(_forest_arrays(model.trees, "tree"))
        arrays["scales"] = np.array(model.scales)
        arrays["train_losses"] = np.array(model.train_losses)
    elif spec.classifier != "constant":
        raise ValidationError(f"cannot persist classifier {spec.classifier!r}")
    _write_archive(path, meta, arrays)


def load_detector(path) -> FittedDetector:
    meta, arrays = _read_archive(path)
    if meta.get("kind") != "detector":
        raise ValidationError(f"{path}: not a detector archive")
    spec = DetectorSpec(meta["name"], meta["family"], meta["classifier"])
    if spec.classifier == "constant":
        return FittedDetector(spec=spec, model=None)
    if spec.classifier == "knn":
        members = []
        for m in range(meta["n_members"]):
            members.append((arrays[f"member{m:04d}_x"], arrays[f"member{m:04d}_y"]))
        model = KnnEnsembleModel(
            members=tuple(members),
            n_members=meta["n_members"],
            subsample_fraction=meta["subsample_fraction"],
            seed=meta["seed"],
        )
    elif spec.classifier == "bag":
        trees = _forest_from_arrays(arrays, meta, "tree", meta["n_trees"])
        boots = tuple(arrays[f"boot{t:04d}"] for t in range(meta["n_trees"]))
        model = BaggedTreesModel(
            trees=tuple(trees),
            bootstrap_indices=boots,
            n_rows=meta["n_rows"],
            seed=meta["seed"],
        )
    else:
        trees = _forest_from_arrays(arrays, meta, "tree", meta["n_trees"])
        model = GradientBoostModel(
            init_logodds=meta["init_logodds"],
            trees=tuple(trees),
            scales=tuple(arrays["scales"].tolist()),
            train_losses=tuple(arrays["train_losses"].tolist()),
            best_round=meta["best_round"],
        )
    return FittedDetector(spec=spec, model=model)


# --------------------------------------------------------- generator models

def save_generator_model(path, kind: str, model) -> None:
    meta: dict = {"kind": f"generator:{kind}"}
    arrays: dict[str, np.ndarray] = {}
    if kind == "m1":
        meta.update(window=model.window, n_assets=model.n_assets, n_trends=len(model.trends))
        meta["directions"] = [t.direction for t in model.trends]
        for i, trend in enumerate(model.trends):
            arrays[f"trend{i:03d}_means"] = trend.means
            arrays[f"trend{i:03d}_factors"] = trend.factors
    elif kind == "m2":
        meta.update(n_assets=model.n_assets, n_trends=len(model.trends))
        meta["directions"] = [t.direction for t in model.trends]
        for i, trend in enumerate(model.trends):
            arrays[f"trend{i:03d}_mean"] = trend.mean
            arrays[f"trend{i:03d}_factor"] = trend.factor
            arrays[f"trend{i:03d}_support"] = trend.cdf.support
            arrays[f"trend{i:03d}_probs"] = trend.cdf.probs
    elif kind in ("gbm", "cev"):
        meta.update(mu=model.mu, sigma=model.sigma, gamma=model.gamma)
    elif kind in ("egarch", "gjr"):
        rows = [[p.omega, p.alpha, p.beta, p.leverage, p.nu, p.mu] for p in model]
        arrays["params"] = np.array(rows)
    else:
        raise ValidationError(f"cannot persist generator kind {kind!r}")
    _write_archive(path, meta, arrays)


def load_generator_model(path):
    meta, arrays = _read_archive(path)
    kind = meta.get("kind", "")
    if not kind.startswith("generator:"):
        raise ValidationError(f"{path}: not a generator archive")
    kind = kind.split(":", 1)[1]
    if kind == "m1":
        trends = tuple(
            WindowedTrend(
                direction=direction,
                means=arrays[f"trend{i:03d}_means"],
                factors=arrays[f"trend{i:03d}_factors"],
            )
            for i, direction in enumerate(meta["directions"])
        )
        return kind, TrendWindowModel(
            window=meta["window"], n_assets=meta["n_assets"], trends=trends
        )
    if kind == "m2":
        trends = tuple(
            PathTrend(
                direction=direction,
                mean=arrays[f"trend{i:03d}_mean"],
                factor=arrays[f"trend{i:03d}_factor"],
                cdf=EmpiricalCdf(
                    support=arrays[f"trend{i:03d}_support"],
                    probs=arrays[f"trend{i:03d}_probs"],
                ),
            )
            for i, direction in enumerate(meta["directions"])
        )
        return kind, TrendPathModel(n_assets=meta["n_assets"], trends=trends)
    if kind in ("gbm", "cev"):
        return kind, SdeParams(
            kind=kind, mu=meta["mu"], sigma=meta["sigma"], gamma=meta["gamma"]
        )
    if kind in ("egarch", "gjr"):
        return kind, [
            GarchParams(kind, row[0], row[1], row[2], row[3], row[4], row[5])
            for row in arrays["params"]
        ]
    raise ValidationError(f"{path}: unknown generator kind {kind!r}")
