#!/usr/bin/env python3
# The experiment engine: repeated stratified k-fold with per-fold SMOTE
# of the training partition only, then the 9-column result table and a
# comparison between two dataset variants.

import numpy as np

from ccq.balance import SmoteConfig
from ccq.embedding import FeatureMatrix
from ccq.evaluation import (
    compare_reports,
    evaluate_model,
    render_comparison_table,
    render_report_table,
    rskf_splits,
)
from ccq.models import LinearSvcConfig, RandomForestConfig


def blobs(n, seed, sep=2.0, minority=0.15, d=8):
    rng = np.random.default_rng(seed)
    n_min = int(round(n * minority))
    offset = np.full(d, sep / np.sqrt(d))
    X = np.vstack([rng.normal(0, 1, (n - n_min, d)), rng.normal(0, 1, (n_min, d)) + offset])
    y = np.concatenate([np.ones(n - n_min, dtype=np.int64), np.zeros(n_min, dtype=np.int64)])
    perm = rng.permutation(n)
    return FeatureMatrix(rows=X[perm], labels=y[perm], ids=tuple(f"p{i}" for i in range(n)))


features = blobs(300, seed=0)

# The split plan shuffles within each class and deals round-robin, so
# every fold keeps the class proportions within one sample.
plan = rskf_splits(features.labels, n_folds=5, n_repeats=2, rng_seed=0)
fold_counts = [np.bincount(features.labels[test], minlength=2).tolist() for _, test in plan.folds[:5]]
print(f"per-fold [not_useful, useful] counts in repeat 0: {fold_counts}")

variant_a = [
    evaluate_model(features, RandomForestConfig(), n_folds=5, n_repeats=2, rng_seed=0,
                   smote_config=SmoteConfig(rng_seed=0), smote_mode="fold", variant="blobs-a"),
    evaluate_model(features, LinearSvcConfig(), n_folds=5, n_repeats=2, rng_seed=0,
                   smote_config=SmoteConfig(rng_seed=0), smote_mode="fold", variant="blobs-a"),
]
print("\nvariant A (in-fold SMOTE):")
print(render_report_table(variant_a), end="")

# A second variant: same models on an easier dataset (wider separation
# plus more rows). compare_reports gives the per-metric deltas and the
# overall mean delta.
more = blobs(420, seed=3, sep=3.0)
variant_b = [
    evaluate_model(more, RandomForestConfig(), n_folds=5, n_repeats=2, rng_seed=0,
                   smote_config=SmoteConfig(rng_seed=0), smote_mode="fold", variant="blobs-b"),
    evaluate_model(more, LinearSvcConfig(), n_folds=5, n_repeats=2, rng_seed=0,
                   smote_config=SmoteConfig(rng_seed=0), smote_mode="fold", variant="blobs-b"),
]
print("\nvariant B (wider separation, more rows):")
print(render_report_table(variant_b), end="")

comparison = compare_reports(variant_a, variant_b)
print("\ndelta table:")
print(render_comparison_table(comparison), end="")
