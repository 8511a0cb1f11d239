"""Repeated stratified k-fold experiments, metrics and reports.

Splits deal each class's shuffled members round-robin into folds, so
per-fold class counts stay within one of ``n_class / n_folds``. An
experiment trains one model per fold (optionally SMOTE-balancing the
training partition first), accumulates a per-fold confusion matrix and
reports the arithmetic mean of the per-fold metrics as percentages.
Per-fold randomness is derived from the fold's position, never from
execution order, so parallel runs reproduce sequential ones exactly.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .balance import SmoteConfig, smote
from .embedding import FeatureMatrix
from .models import build_model, config_with_seed

__all__ = [
    "EvaluationError",
    "TooFewSamples",
    "LengthMismatch",
    "SchemaMismatch",
    "SplitPlan",
    "ConfusionMatrix",
    "EvaluationReport",
    "ComparisonReport",
    "MetricDelta",
    "rskf_splits",
    "confusion",
    "class_metrics",
    "cohen_kappa",
    "run_experiment",
    "evaluate_model",
    "compare_reports",
    "render_report_table",
    "render_comparison_table",
    "REPORT_SCHEMA",
    "TABLE_HEADER",
    "METRIC_KEYS",
]

log = logging.getLogger(__name__)

REPORT_SCHEMA = "ccq-report/1"

TABLE_HEADER = (
    "Model | Macro-F1 (U) | Precision | Recall | Accuracy"
    " | Macro-F1 (NU) | Precision | Recall | Accuracy"
)

# Canonical per-model metric keys used in reports and comparisons.
METRIC_KEYS = (
    "f1_useful",
    "precision_useful",
    "recall_useful",
    "f1_not_useful",
    "precision_not_useful",
    "recall_not_useful",
    "accuracy",
)


class EvaluationError(Exception):
    pass


class TooFewSamples(EvaluationError):
    def __init__(self, label: int, count: int, n_folds: int):
        self.label = label
        self.count = count
        self.n_folds = n_folds
        super().__init__(
            f"class {label} has {count} samples, fewer than n_folds={n_folds}"
        )


class LengthMismatch(EvaluationError):
    def __init__(self, len_a: int, len_b: int):
        super().__init__(f"sequences must have equal positive length, got {len_a} and {len_b}")


class SchemaMismatch(EvaluationError):
    pass


@dataclass(frozen=True)
class SplitPlan:
    """(train, test) index pairs ordered by (repeat, fold)."""

    folds: tuple[tuple[np.ndarray, np.ndarray], ...]
    n_folds: int
    n_repeats: int
    rng_seed: int
    n_samples: int


def rskf_splits(labels, n_folds: int = 10, n_repeats: int = 3, rng_seed: int = 0) -> SplitPlan:
    """Repeated stratified k-fold split plan over a label vector.

    Within each repeat the test folds partition the index range; each
    class's members are shuffled with a repeat-specific stream and dealt
    round-robin, keeping per-fold class counts within +-1 of the exact
    proportion.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    if rng_seed < 0:
        raise ValueError("rng_seed must be >= 0")
    n = len(labels)
    if n < n_folds:
        raise ValueError(f"cannot split {n} samples into {n_folds} folds")
    classes = np.unique(labels)
    for c in classes:
        count = int(np.sum(labels == c))
        # With two members per class, every training partition keeps both
        # classes (a class's members never share a test fold).
        if count < 2:
            raise TooFewSamples(int(c), count, n_folds)

    all_indices = np.arange(n)
    folds: list[tuple[np.ndarray, np.ndarray]] = []
    for repeat in range(n_repeats):
        rng = np.random.default_rng([rng_seed, repeat])
        members: list[list[int]] = [[] for _ in range(n_folds)]
        # One position counter across classes keeps total fold sizes within
        # one of each other while each class's members stay evenly dealt.
        position = 0
        for c in classes:
            shuffled = rng.permutation(np.flatnonzero(labels == c))
            for sample in shuffled:
                members[position % n_folds].append(int(sample))
                position += 1
        for f in range(n_folds):
            test = np.sort(np.asarray(members[f], dtype=np.int64))
            train = np.setdiff1d(all_indices, test, assume_unique=True)
            folds.append((train, test))
    return SplitPlan(
        folds=tuple(folds),
        n_folds=n_folds,
        n_repeats=n_repeats,
        rng_seed=rng_seed,
        n_samples=n,
    )


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with Useful (1) as the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    def swapped(self) -> "ConfusionMatrix":
        """Counts with the positive class flipped to Not Useful."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred) or len(y_true) == 0:
        raise LengthMismatch(len(y_true), len(y_pred))
    return ConfusionMatrix(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        tn=int(np.sum((y_true == 0) & (y_pred == 0))),
    )


def _safe_ratio(numerator: float, denominator: float, name: str) -> float:
    if denominator == 0:
        log.info("%s is 0/0; reporting 0 by convention", name)
        return 0.0
    return numerator / denominator


def class_metrics(cm: ConfusionMatrix, positive_class: int = 1) -> dict[str, float]:
    """Precision, recall and F1 for one class; 0/0 ratios report 0."""
    if positive_class == 0:
        cm = cm.swapped()
    precision = _safe_ratio(cm.tp, cm.tp + cm.fp, "precision")
    recall = _safe_ratio(cm.tp, cm.tp + cm.fn, "recall")
    f1 = _safe_ratio(2 * precision * recall, precision + recall, "f1")
    return {"precision": precision, "recall": recall, "f1": f1}


def cohen_kappa(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two annotators' label lists."""
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b) or not a:
        raise LengthMismatch(len(a), len(b))
    n = len(a)
    observed = sum(x == y for x, y in zip(a, b)) / n
    expected = 0.0
    for category in set(a) | set(b):
        expected += (a.count(category) / n) * (b.count(category) / n)
    if expected == 1.0:
        return 1.0
    return (observed - expected) / (1.0 - expected)


def _fold_metrics(cm: ConfusionMatrix) -> dict[str, float]:
    useful = class_metrics(cm, positive_class=1)
    not_useful = class_metrics(cm, positive_class=0)
    metrics = {
        "f1_useful": useful["f1"],
        "precision_useful": useful["precision"],
        "recall_useful": useful["recall"],
        "f1_not_useful": not_useful["f1"],
        "precision_not_useful": not_useful["precision"],
        "recall_not_useful": not_useful["recall"],
        "accuracy": cm.accuracy,
    }
    metrics["macro_f1"] = 0.5 * (metrics["f1_useful"] + metrics["f1_not_useful"])
    return {key: 100.0 * value for key, value in metrics.items()}


@dataclass(frozen=True)
class EvaluationReport:
    """Mean cross-validation metrics (percentages) for one model run."""

    model: str
    variant: str
    smote_mode: str
    n_folds: int
    n_repeats: int
    rng_seed: int
    metrics: dict  # METRIC_KEYS + macro_f1 -> mean percent
    per_fold: tuple  # per-fold records, ordered by (repeat, fold)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "model": self.model,
            "variant": self.variant,
            "smote_mode": self.smote_mode,
            "n_folds": self.n_folds,
            "n_repeats": self.n_repeats,
            "rng_seed": self.rng_seed,
            "metrics": self.metrics,
            "per_fold": list(self.per_fold),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "EvaluationReport":
        if payload.get("schema") != REPORT_SCHEMA:
            raise SchemaMismatch(f"unsupported report schema {payload.get('schema')!r}")
        return cls(
            model=payload["model"],
            variant=payload["variant"],
            smote_mode=payload["smote_mode"],
            n_folds=payload["n_folds"],
            n_repeats=payload["n_repeats"],
            rng_seed=payload["rng_seed"],
            metrics=payload["metrics"],
            per_fold=tuple(payload["per_fold"]),
        )


# Worker context for process pools: the feature matrix is shipped once per
# worker instead of once per fold task.
_WORKER_CTX: dict = {}


def _init_worker(rows, labels, ids, model_config, smote_config, smote_mode, base_seed, n_folds):
    _WORKER_CTX.update(
        rows=rows,
        labels=labels,
        ids=ids,
        model_config=model_config,
        smote_config=smote_config,
        smote_mode=smote_mode,
        base_seed=base_seed,
        n_folds=n_folds,
    )


def _run_fold(task):
    repeat, fold, train_idx, test_idx = task
    ctx = _WORKER_CTX
    return _execute_fold(
        repeat,
        fold,
        train_idx,
        test_idx,
        ctx["rows"],
        ctx["labels"],
        ctx["ids"],
        ctx["model_config"],
        ctx["smote_config"],
        ctx["smote_mode"],
        ctx["base_seed"],
        ctx["n_folds"],
    )


def _execute_fold(
    repeat,
    fold,
    train_idx,
    test_idx,
    rows,
    labels,
    ids,
    model_config,
    smote_config,
    smote_mode,
    base_seed,
    n_folds,
):
    fold_seed = base_seed + repeat * n_folds + fold
    train_rows = rows[train_idx]
    train_labels = labels[train_idx]
    train_ids = tuple(ids[i] for i in train_idx)
    n_synthetic = 0
    if smote_mode == "fold":
        balanced = smote(
            FeatureMatrix(rows=train_rows, labels=train_labels, ids=train_ids),
            dataclasses.replace(smote_config, rng_seed=fold_seed),
        )
        n_synthetic = balanced.n - len(train_idx)
        train_rows, train_labels, train_ids = balanced.rows, balanced.labels, balanced.ids

    model = build_model(config_with_seed(model_config, fold_seed)).fit(train_rows, train_labels)
    predictions = model.predict(rows[test_idx])
    cm = confusion(labels[test_idx], predictions)
    record = {
        "repeat": repeat,
        "fold": fold,
        "seed": fold_seed,
        "tp": cm.tp,
        "fp": cm.fp,
        "fn": cm.fn,
        "tn": cm.tn,
        "n_train": int(len(train_labels)),
        "n_test": int(len(test_idx)),
        "n_synthetic_train": int(n_synthetic),
        "n_synthetic_test": sum(1 for i in test_idx if ids[i].startswith("synthetic-")),
        "metrics": _fold_metrics(cm),
    }
    return record


def run_experiment(
    features: FeatureMatrix,
    model_config,
    plan: SplitPlan,
    smote_config: SmoteConfig | None = None,
    smote_mode: str = "none",
    rng_seed: int | None = None,
    jobs: int = 1,
    variant: str = "dataset",
    model_name: str | None = None,
) -> EvaluationReport:
    """Train and score one model configuration across every fold.

    ``smote_mode`` is one of ``none`` (use folds as-is), ``fold``
    (oversample each training partition; test partitions never see
    synthetic rows) or ``global`` (dataset was balanced upstream, before
    the plan was built; folds are used as-is and the mode is recorded).
    The per-fold seed is ``rng_seed + repeat * n_folds + fold``.
    """
    if smote_mode not in ("none", "fold", "global"):
        raise ValueError(f"unknown smote_mode {smote_mode!r}")
    if smote_mode == "fold" and smote_config is None:
        raise ValueError("smote_mode='fold' requires a SmoteConfig")
    if plan.n_samples != features.n:
        raise ValueError("split plan was built for a different dataset size")
    base_seed = plan.rng_seed if rng_seed is None else rng_seed

    tasks = []
    for position, (train_idx, test_idx) in enumerate(plan.folds):
        repeat, fold = divmod(position, plan.n_folds)
        tasks.append((repeat, fold, train_idx, test_idx))

    if jobs > 1:
        init_args = (
            features.rows,
            features.labels,
            features.ids,
            model_config,
            smote_config,
            smote_mode,
            base_seed,
            plan.n_folds,
        )
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=init_args) as pool:
            records = list(pool.map(_run_fold, tasks))
    else:
        records = [
            _execute_fold(
                repeat,
                fold,
                train_idx,
                test_idx,
                features.rows,
                features.labels,
                features.ids,
                model_config,
                smote_config,
                smote_mode,
                base_seed,
                plan.n_folds,
            )
            for repeat, fold, train_idx, test_idx in tasks
        ]

    records.sort(key=lambda r: (r["repeat"], r["fold"]))
    metric_names = list(records[0]["metrics"].keys())
    means = {
        name: sum(r["metrics"][name] for r in records) / len(records)
        for name in metric_names
    }
    if model_name is None:
        model_name = build_model(model_config).display_name
    return EvaluationReport(
        model=model_name,
        variant=variant,
        smote_mode=smote_mode,
        n_folds=plan.n_folds,
        n_repeats=plan.n_repeats,
        rng_seed=base_seed,
        metrics=means,
        per_fold=tuple(records),
    )


def evaluate_model(
    features: FeatureMatrix,
    model_config,
    *,
    n_folds: int = 10,
    n_repeats: int = 3,
    rng_seed: int = 0,
    smote_config: SmoteConfig | None = None,
    smote_mode: str = "fold",
    jobs: int = 1,
    variant: str = "dataset",
) -> EvaluationReport:
    """Full pipeline for one model: (optional global SMOTE) -> plan -> folds."""
    if smote_mode == "global":
        if smote_config is None:
            raise ValueError("smote_mode='global' requires a SmoteConfig")
        features = smote(features, dataclasses.replace(smote_config, rng_seed=rng_seed))
    plan = rskf_splits(features.labels, n_folds=n_folds, n_repeats=n_repeats, rng_seed=rng_seed)
    return run_experiment(
        features,
        model_config,
        plan,
        smote_config=smote_config,
        smote_mode=smote_mode,
        rng_seed=rng_seed,
        jobs=jobs,
        variant=variant,
    )


@dataclass(frozen=True)
class MetricDelta:
    model: str
    metric: str
    baseline: float
    augmented: float

    @property
    def delta(self) -> float:
        return self.augmented - self.baseline


@dataclass(frozen=True)
class ComparisonReport:
    """Per-model, per-metric deltas between two runs of the same models."""

    baseline_variant: str
    augmented_variant: str
    rows: tuple[MetricDelta, ...]

    @property
    def overall_mean_delta(self) -> float:
        return sum(row.delta for row in self.rows) / len(self.rows)

    def to_dict(self) -> dict:
        return {
            "schema": "ccq-comparison/1",
            "baseline_variant": self.baseline_variant,
            "augmented_variant": self.augmented_variant,
            "rows": [
                {
                    "model": r.model,
                    "metric": r.metric,
                    "baseline": r.baseline,
                    "augmented": r.augmented,
                    "delta": r.delta,
                }
                for r in self.rows
            ],
            "overall_mean_delta": self.overall_mean_delta,
        }


def compare_reports(baseline_reports, augmented_reports) -> ComparisonReport:
    """Metric deltas (augmented - baseline) for a matched set of models.

    The overall mean delta averages over all models and the seven
    canonical metrics. Raises SchemaMismatch when the model sets differ.
    """
    baseline_by_model = {r.model: r for r in baseline_reports}
    augmented_by_model = {r.model: r for r in augmented_reports}
    if set(baseline_by_model) != set(augmented_by_model):
        raise SchemaMismatch(
            f"model sets differ: {sorted(baseline_by_model)} vs {sorted(augmented_by_model)}"
        )
    if not baseline_by_model:
        raise SchemaMismatch("no models to compare")
    rows = []
    for model in baseline_by_model:
        base = baseline_by_model[model]
        aug = augmented_by_model[model]
        for key in METRIC_KEYS:
            if key not in base.metrics or key not in aug.metrics:
                raise SchemaMismatch(f"metric {key!r} missing for model {model!r}")
            rows.append(
                MetricDelta(
                    model=model, metric=key, baseline=base.metrics[key], augmented=aug.metrics[key]
                )
            )
    baseline_variant = next(iter(baseline_by_model.values())).variant
    augmented_variant = next(iter(augmented_by_model.values())).variant
    return ComparisonReport(
        baseline_variant=baseline_variant,
        augmented_variant=augmented_variant,
        rows=tuple(rows),
    )


def render_report_table(reports) -> str:
    """Fixed 9-column result table; accuracy repeats in both class blocks."""
    lines = [TABLE_HEADER]
    for report in reports:
        m = report.metrics
        lines.append(
            f"{report.model} | {m['f1_useful']:.3f} | {m['precision_useful']:.3f}"
            f" | {m['recall_useful']:.3f} | {m['accuracy']:.3f}"
            f" | {m['f1_not_useful']:.3f} | {m['precision_not_useful']:.3f}"
            f" | {m['recall_not_useful']:.3f} | {m['accuracy']:.3f}"
        )
    return "\n".join(lines) + "\n"


def render_comparison_table(comparison: ComparisonReport) -> str:
    lines = ["Model | Metric | Baseline | Augmented | Delta"]
    for row in comparison.rows:
        lines.append(
            f"{row.model} | {row.metric} | {row.baseline:.3f}"
            f" | {row.augmented:.3f} | {row.delta:+.3f}"
        )
    lines.append(f"Overall mean delta: {comparison.overall_mean_delta:+.3f}")
    return "\n".join(lines) + "\n"
