"""End-to-end experiment orchestration.

For every (method, fold) cell of a 5x2 cross-validation plan the runner
fits the imputer and scaler on the training half, transforms both halves,
resamples the training half only, trains logistic regression, and scores
the untouched test half under two positive-label modes: ``overall`` (the
dataset's declared positive class) and ``minority`` (the training fold's
minority class).  Numeric failures are recorded per cell and the run
continues.  Everything is deterministic given the master seed: per-fold
seeds are derived by hashing (master_seed, iteration, half, method), so
adding a method never perturbs another method's folds, and output rows are
canonically ordered so repeated runs are byte-identical.

Outputs (when an output directory is set): ``metrics.csv`` with columns
(dataset, method, iteration, half, mode, metric, value), ``pairwise.json``
with one record (method_a, method_b, metric, mode, t, p, df, degenerate)
per method pair, ``failures.csv``, and optional per-fold resampled CSVs
with an ``is_synthetic`` column.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    InvalidInputError,
    MissingResultError,
    NumericFailureError,
    check_random_state,
)
from .datasets import DatasetSpec, DatasetTable, load_dataset
from .evaluation import METRIC_NAMES, LogisticRegression, compute_metrics
from .preprocess import (
    TrainStandardScaler,
    ZeroMedianImputer,
    make_5x2_splits,
    stratified_subsample,
)
from .resampling import canonical_method_name, make_resampler
from .stats_test import TestResult, dietterich_5x2

__all__ = ["ExperimentConfig", "MetricRow", "ResultStore", "run_experiment",
           "pairwise_tests", "fold_seed", "MODES"]

MODES = ("overall", "minority")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run needs."""

    data_path: str
    dataset_spec: DatasetSpec
    methods: tuple
    master_seed: int = 0
    out_dir: str | None = None
    truncation_level: int | None = None
    k_neighbors: int = 5
    jitter_sd: float = 1e-6
    max_iter: int = 5000
    tol: float = 1e-6
    export_resampled: bool = False
    subsample: int | None = None

    def __post_init__(self):
        # duplicates allowed: a method listed twice just reruns the same folds
        methods = tuple(canonical_method_name(m) for m in self.methods)
        if not methods:
            raise InvalidInputError("methods must not be empty")
        object.__setattr__(self, "methods", methods)


@dataclass(frozen=True)
class MetricRow:
    dataset: str
    method: str
    iteration: int
    half: int
    mode: str
    metric: str
    value: float | None


@dataclass
class ResultStore:
    """Per-fold metric rows plus pairwise test records and failures."""

    dataset: str
    methods: tuple
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    pairwise: list = field(default_factory=list)

    def _index(self):
        if not hasattr(self, "_idx") or len(self._idx) != len(self.rows):
            self._idx = {
                (r.method, r.iteration, r.half, r.mode, r.metric): r.value for r in self.rows
            }
        return self._idx

    def value(self, method, iteration, half, mode, metric):
        key = (method, iteration, half, mode, metric)
        idx = self._index()
        if key not in idx:
            raise MissingResultError(
                f"no metric row for method={method} iteration={iteration} "
                f"half={half} mode={mode} metric={metric}"
            )
        return idx[key]

    def diff_table(self, method_a, method_b, metric, mode):
        """5x2 table of (method_a - method_b) per fold, SplitPlan order."""
        table = np.empty((5, 2))
        for i in range(1, 6):
            for r in (1, 2):
                va = self.value(method_a, i, r, mode, metric)
                vb = self.value(method_b, i, r, mode, metric)
                if va is None or vb is None:
                    raise MissingResultError(
                        f"metric {metric} undefined for iteration={i} half={r} mode={mode}"
                    )
                table[i - 1, r - 1] = va - vb
        return table

    def aggregate(self, method, metric, mode="overall"):
        """(mean, sample sd) of a metric over the 10 folds."""
        vals = [self.value(method, i, r, mode, metric) for i in range(1, 6) for r in (1, 2)]
        if any(v is None for v in vals):
            raise MissingResultError(f"metric {metric} undefined in some folds")
        arr = np.asarray(vals, dtype=np.float64)
        return float(arr.mean()), float(arr.std(ddof=1))


def fold_seed(master_seed: int, iteration: int, half: int, method: str) -> int:
    """Stable per-(fold, method) seed: leading 8 bytes of a SHA-256 hash."""
    digest = hashlib.sha256(f"{master_seed}:{iteration}:{half}:{method}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def pairwise_tests(store: ResultStore, metric: str, mode: str, method_pairs=None):
    """Dietterich test records for ordered method pairs on one metric/mode.

    Defaults to all ordered pairs (a before b) in the store's method order.
    """
    if method_pairs is None:
        ms = store.methods
        method_pairs = [(ms[i], ms[j]) for i in range(len(ms)) for j in range(i + 1, len(ms))]
    records = []
    for a, b in method_pairs:
        result = dietterich_5x2(store.diff_table(a, b, metric, mode))
        records.append({
            "method_a": a,
            "method_b": b,
            "metric": metric,
            "mode": mode,
            "t": result.t,
            "p": result.p_two_sided,
            "df": result.df,
            "degenerate": result.degenerate,
        })
    return records


def _positive_score_column(model, positive_label):
    matches = np.flatnonzero(model.classes_ == positive_label)
    if matches.size != 1:
        raise InvalidInputError(
            f"positive label {positive_label!r} not among trained classes {model.classes_.tolist()}"
        )
    return int(matches[0])


def _zero_coded_indices(spec: DatasetSpec, feature_names) -> tuple:
    """Resolve ``spec.zero_coded_columns`` names to feature indices."""
    positions = {name: j for j, name in enumerate(feature_names)}
    missing = [c for c in spec.zero_coded_columns if c not in positions]
    if missing:
        raise InvalidInputError(f"zero-coded columns {missing} not among features")
    return tuple(positions[c] for c in spec.zero_coded_columns)


def _run_fold(X, y, train_idx, test_idx, method, cfg, seed, zero_cols):
    """One (method, fold) cell. Returns (metric reports by mode, export payload)."""
    X_train, y_train = X[train_idx], y[train_idx]
    X_test, y_test = X[test_idx], y[test_idx]

    imputer = ZeroMedianImputer(zero_coded_columns=zero_cols).fit(X_train)
    X_train = imputer.transform(X_train)
    X_test = imputer.transform(X_test)
    scaler = TrainStandardScaler().fit(X_train)
    X_train = scaler.transform(X_train)
    X_test = scaler.transform(X_test)

    rng = check_random_state(seed)
    resampler = make_resampler(
        method,
        k_neighbors=cfg.k_neighbors,
        jitter_sd=cfg.jitter_sd,
        truncation_level=cfg.truncation_level,
        random_state=rng,
    )
    X_res, y_res = resampler.fit_resample(X_train, y_train)
    out = resampler.output_

    model = LogisticRegression(max_iter=cfg.max_iter, tol=cfg.tol).fit(X_res, y_res)
    proba = model.predict_proba(X_test)

    reports = {}
    for mode in MODES:
        positive = cfg.dataset_spec.positive_label if mode == "overall" else out.minority_label
        scores = proba[:, _positive_score_column(model, positive)]
        reports[mode] = compute_metrics(y_test, scores, threshold=0.5, positive_label=positive)
    return reports, out


def run_experiment(cfg: ExperimentConfig) -> ResultStore:
    """Run the full grid and (optionally) persist results under cfg.out_dir."""
    table = load_dataset(cfg.data_path, cfg.dataset_spec)
    X, y = table.features, table.labels
    if cfg.subsample is not None:
        keep = stratified_subsample(y, cfg.subsample, cfg.master_seed)
        X, y = X[keep], y[keep]
    plan = make_5x2_splits(y, cfg.master_seed)
    store = ResultStore(dataset=table.name, methods=cfg.methods)
    zero_cols = _zero_coded_indices(cfg.dataset_spec, table.feature_names)

    exports = []
    for method in cfg.methods:
        for iteration, half, train_idx, test_idx in plan.folds():
            seed = fold_seed(cfg.master_seed, iteration, half, method)
            try:
                reports, out = _run_fold(X, y, train_idx, test_idx, method, cfg, seed, zero_cols)
            except (NumericFailureError, FloatingPointError) as exc:
                store.failures.append({
                    "dataset": table.name,
                    "method": method,
                    "iteration": iteration,
                    "half": half,
                    "error": str(exc),
                })
                continue
            for mode in MODES:
                report = reports[mode]
                for metric in METRIC_NAMES:
                    store.rows.append(MetricRow(
                        dataset=table.name,
                        method=method,
                        iteration=iteration,
                        half=half,
                        mode=mode,
                        metric=metric,
                        value=report.value(metric),
                    ))
            if cfg.export_resampled:
                exports.append((method, iteration, half, out))

    for metric in METRIC_NAMES:
        for mode in MODES:
            try:
                store.pairwise.extend(pairwise_tests(store, metric, mode))
            except MissingResultError as exc:
                store.failures.append({
                    "dataset": table.name,
                    "method": "(pairwise)",
                    "iteration": 0,
                    "half": 0,
                    "error": f"{metric}/{mode}: {exc}",
                })

    if cfg.out_dir is not None:
        _persist(cfg, store, table, exports)
    return store


def _fmt(value) -> str:
    if value is None:
        return "NA"
    return repr(float(value))


def _persist(cfg: ExperimentConfig, store: ResultStore, table: DatasetTable, exports):
    os.makedirs(cfg.out_dir, exist_ok=True)

    with open(os.path.join(cfg.out_dir, "metrics.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "method", "iteration", "half", "mode", "metric", "value"])
        for r in store.rows:
            writer.writerow([r.dataset, r.method, r.iteration, r.half, r.mode, r.metric, _fmt(r.value)])

    records = []
    for rec in store.pairwise:
        out = dict(rec)
        if not math.isfinite(out["t"]):
            out["t"] = None  # JSON has no Infinity; degenerate flag tells the story
        records.append(out)
    with open(os.path.join(cfg.out_dir, "pairwise.json"), "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")

    with open(os.path.join(cfg.out_dir, "failures.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "method", "iteration", "half", "error"])
        for f in store.failures:
            writer.writerow([f["dataset"], f["method"], f["iteration"], f["half"], f["error"]])

    if exports:
        res_dir = os.path.join(cfg.out_dir, "resampled")
        os.makedirs(res_dir, exist_ok=True)
        for method, iteration, half, out in exports:
            path = os.path.join(res_dir, f"{method}_iter{iteration}_half{half}.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(list(table.feature_names) + ["label", "is_synthetic"])
                for row, label, syn in zip(out.features, out.labels, out.synthetic_mask):
                    writer.writerow([repr(float(v)) for v in row] + [label, int(syn)])
