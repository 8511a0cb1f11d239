"""Acceptance suite: one test per release criterion.

Each test prints a `[acceptance] <criterion>: PASS/FAIL` line (run with
`pytest tests/test_acceptance.py -v -rA` to see them) and enforces the
stated numeric tolerances and runtime budgets.
"""

import itertools
import json
import os
import time
import numpy as np
import pytest

from ccq.balance import SmoteConfig, minority_knn, smote
from ccq.cli import main as cli_main
from ccq.embedding import FeatureMatrix
from ccq.evaluation import (
    TABLE_HEADER,
    compare_reports,
    evaluate_model,
    rskf_splits,
)
from ccq.models import (
    LinearSvcConfig,
    LinearSvcModel,
    MlpConfig,
    MlpModel,
    RandomForestConfig,
    VotingConfig,
    gini_impurity,
    loss_and_gradients,
    vote_predict,
)
from ccq.models.mlp import MlpModel as _Mlp

from conftest import gaussian_blobs
from test_evaluation import RUN_A, RUN_B


def report(name: str, passed: bool, detail: str = "") -> bool:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] {name}: {status}{suffix}")
    return passed


def blob_matrix(**kwargs):
    X, y = gaussian_blobs(**kwargs)
    return FeatureMatrix(rows=X, labels=y, ids=tuple(f"p{i}" for i in range(len(y))))


class TestNumericOracles:
    def test_numeric_oracle_suite(self):
        start = time.perf_counter()
        failures = []

        # Gini vs brute-force formula on 200 random count pairs.
        rng = np.random.default_rng(0)
        for _ in range(200):
            counts = rng.integers(0, 100, size=2)
            if counts.sum() == 0:
                counts[0] = 1
            total = counts.sum()
            expected = 1.0 - (counts[0] / total) ** 2 - (counts[1] / total) ** 2
            if abs(gini_impurity(counts) - expected) > 1e-12:
                failures.append(f"gini mismatch for {counts}")

        # MLP analytic gradients vs central finite differences (1e-6, f64).
        rng = np.random.default_rng(42)
        X = rng.normal(size=(5, 4))
        y = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
        model = _Mlp(MlpConfig(rng_seed=7))
        model._init_params(4, np.random.default_rng(7))
        weights, biases = model.weights, model.biases
        _, w_grads, b_grads = loss_and_gradients(weights, biases, X, y, 1e-4)
        h, worst = 1e-6, 0.0
        for p, g in zip(weights + biases, w_grads + b_grads):
            flat_p, flat_g = p.ravel(), g.ravel()
            for i in range(flat_p.size):
                original = flat_p[i]
                flat_p[i] = original + h
                up, _, _ = loss_and_gradients(weights, biases, X, y, 1e-4)
                flat_p[i] = original - h
                down, _, _ = loss_and_gradients(weights, biases, X, y, 1e-4)
                flat_p[i] = original
                numeric = (up - down) / (2 * h)
                rel = abs(flat_g[i] - numeric) / max(abs(flat_g[i]) + abs(numeric), 1e-8)
                worst = max(worst, rel)
        if worst >= 1e-4:
            failures.append(f"gradient check max relative error {worst:.2e}")

        # First Adam step vs closed form within 1e-9.
        Xa = np.random.default_rng(0).normal(size=(6, 3))
        ya = np.array([0.0, 1.0, 1.0, 0.0, 1.0, 0.0])
        config = MlpConfig(hidden_sizes=(4,), max_iter=1, batch_size=6, shuffle=False, rng_seed=11)
        init = _Mlp(config)
        init._init_params(3, np.random.default_rng(11))
        _, gw, gb = loss_and_gradients(init.weights, init.biases, Xa, ya, config.alpha)
        fitted = MlpModel(config).fit(Xa, ya)
        for p0, g, p1 in zip(init.weights + init.biases, gw + gb, fitted.weights + fitted.biases):
            expected = p0 - config.learning_rate * g / (np.abs(g) + config.epsilon)
            if np.max(np.abs(p1 - expected)) >= 1e-9:
                failures.append("adam first step deviates from closed form")
                break

        # SVC: non-increasing objective, final grad inf-norm < 1e-4, on
        # separable fixtures.
        fixtures = [
            (np.array([[-1.0], [1.0]]), np.array([0, 1])),
            (
                np.vstack(
                    [
                        np.random.default_rng(1).normal(0, 1, size=(50, 4)),
                        np.random.default_rng(2).normal(3, 1, size=(50, 4)),
                    ]
                ),
                np.array([0] * 50 + [1] * 50),
            ),
        ]
        for Xs, ys in fixtures:
            svc = LinearSvcModel(LinearSvcConfig()).fit(Xs, ys)
            curve = svc.metadata["objective_curve"]
            if not all(b <= a for a, b in zip(curve, curve[1:])):
                failures.append("svc objective increased")
            if svc.metadata["final_grad_inf_norm"] >= 1e-4:
                failures.append(
                    f"svc final grad inf-norm {svc.metadata['final_grad_inf_norm']:.2e}"
                )

        # Hard voting equals exhaustive majority on all 8 patterns.
        class Fixed:
            def __init__(self, v):
                self.v = v

            def predict(self, X):
                return np.full(len(X), self.v, dtype=np.int64)

        for pattern in itertools.product([0, 1], repeat=3):
            expected = 1 if sum(pattern) >= 2 else 0
            got = vote_predict([Fixed(v) for v in pattern], np.zeros((1, 1)))[0]
            if got != expected:
                failures.append(f"vote {pattern} -> {got}")

        elapsed = time.perf_counter() - start
        if elapsed >= 30.0:
            failures.append(f"runtime {elapsed:.1f}s over 30s budget")
        ok = report("numeric-oracles", not failures, f"{elapsed:.1f}s" if not failures else "; ".join(failures))
        assert ok, failures

    def test_split_balance_suite(self):
        start = time.perf_counter()
        failures = []

        # RSKF stratification, disjointness, coverage on 50 random vectors.
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 50:
            n = int(rng.integers(40, 140))
            share = float(rng.uniform(0.15, 0.85))
            labels = (rng.random(n) < share).astype(np.int64)
            n_folds = int(rng.integers(2, 7))
            if min(np.bincount(labels, minlength=2)) < n_folds:
                continue
            checked += 1
            plan = rskf_splits(labels, n_folds=n_folds, n_repeats=2, rng_seed=checked)
            for repeat in range(2):
                tests = [plan.folds[repeat * n_folds + f][1] for f in range(n_folds)]
                if sorted(np.concatenate(tests).tolist()) != list(range(n)):
                    failures.append("coverage violated")
            for train, test in plan.folds:
                if set(train) & set(test):
                    failures.append("train/test overlap")
                for c in (0, 1):
                    count = int(np.sum(labels[test] == c))
                    if abs(count - np.sum(labels == c) / n_folds) >= 1.0:
                        failures.append("stratification out of bounds")

        # SMOTE: segment membership, exact parity, bitwise reproducibility.
        rng = np.random.default_rng(5)
        minority = rng.normal(size=(20, 6))
        majority = rng.normal(loc=4.0, size=(50, 6))
        matrix = FeatureMatrix(
            rows=np.vstack([majority, minority]),
            labels=np.array([1] * 50 + [0] * 20, dtype=np.int64),
            ids=tuple(f"r{i}" for i in range(70)),
        )
        config = SmoteConfig(k_neighbors=5, rng_seed=17)
        out1 = smote(matrix, config)
        out2 = smote(matrix, config)
        counts = np.bincount(out1.labels)
        if counts[0] != counts[1]:
            failures.append(f"counts {counts} not 50-50")
        if not (np.array_equal(out1.rows, out2.rows) and out1.ids == out2.ids):
            failures.append("smote not bitwise reproducible")
        neighbors = minority_knn(minority, config.k_neighbors)
        for point in out1.rows[70:]:
            best = np.inf
            for i, base in enumerate(minority):
                for j in neighbors[i]:
                    direction = minority[j] - base
                    diff = point - base
                    denom = float(direction @ direction)
                    if denom == 0.0:
                        continue
                    u = float(diff @ direction) / denom
                    if not (0.0 <= u < 1.0):
                        continue
                    best = min(best, float(np.max(np.abs(diff - u * direction))))
            if best >= 1e-9:
                failures.append(f"synthetic point off segment (residual {best:.2e})")

        # In-fold mode leaks no synthetic ids into test partitions.
        fold_report = evaluate_model(
            blob_matrix(n=80, d=4, sep=2.0, minority=0.2, seed=3),
            MlpConfig(max_iter=5),
            n_folds=4,
            n_repeats=2,
            rng_seed=0,
            smote_config=SmoteConfig(rng_seed=0),
            smote_mode="fold",
        )
        if any(r["n_synthetic_test"] != 0 for r in fold_report.per_fold):
            failures.append("synthetic rows leaked into a test partition")

        elapsed = time.perf_counter() - start
        if elapsed >= 30.0:
            failures.append(f"runtime {elapsed:.1f}s over 30s budget")
        ok = report("split-balance", not failures, f"{elapsed:.1f}s" if not failures else "; ".join(failures))
        assert ok, failures


class TestSyntheticEndToEnd:
    def test_blob_pipeline_gates(self):
        start = time.perf_counter()
        failures = []
        matrix = blob_matrix()  # 600 x 16, centers 2 sigma apart, 90/10
        smote_config = SmoteConfig(rng_seed=0)
        jobs = 2

        rf = evaluate_model(matrix, RandomForestConfig(), rng_seed=0, smote_mode="none", jobs=jobs)
        nn = evaluate_model(matrix, MlpConfig(), rng_seed=0, smote_mode="none", jobs=jobs)
        svc = evaluate_model(matrix, LinearSvcConfig(), rng_seed=0, smote_mode="none", jobs=jobs)
        svc_balanced = evaluate_model(
            matrix,
            LinearSvcConfig(),
            rng_seed=0,
            smote_config=smote_config,
            smote_mode="fold",
            jobs=jobs,
        )
        voting = evaluate_model(matrix, VotingConfig(), rng_seed=0, smote_mode="none", jobs=jobs)

        if nn.metrics["accuracy"] < 90.0:
            failures.append(f"NN accuracy {nn.metrics['accuracy']:.2f} < 90")
        if rf.metrics["accuracy"] < 90.0:
            failures.append(f"RF accuracy {rf.metrics['accuracy']:.2f} < 90")
        gap = svc_balanced.metrics["recall_not_useful"] - svc.metrics["recall_not_useful"]
        if gap < 10.0:
            failures.append(f"SMOTE recall gap {gap:.1f} < 10 points")
        component_floor = min(
            rf.metrics["accuracy"], nn.metrics["accuracy"], svc.metrics["accuracy"]
        )
        if voting.metrics["accuracy"] < component_floor:
            failures.append(
                f"voting {voting.metrics['accuracy']:.2f} under component floor {component_floor:.2f}"
            )

        elapsed = time.perf_counter() - start
        if elapsed >= 120.0:
            failures.append(f"runtime {elapsed:.1f}s over 120s budget")
        detail = (
            f"{elapsed:.0f}s; RF {rf.metrics['accuracy']:.1f} NN {nn.metrics['accuracy']:.1f} "
            f"gap {gap:.1f}pts VC {voting.metrics['accuracy']:.1f}"
        )
        ok = report("synthetic-end-to-end", not failures, detail if not failures else "; ".join(failures))
        assert ok, failures


SMALL_CSV = "code,comment,label\n" + "".join(
    f'"int x{i} = {i};","set value {i}",{"Useful" if i % 3 else "Not Useful"}\n'
    for i in range(40)
)


class TestReportFidelity:
    def test_table_layout(self, tmp_path, capsys):
        failures = []
        seed_csv = tmp_path / "seed.csv"
        seed_csv.write_text(SMALL_CSV)
        out_dir = tmp_path / "out"
        code = cli_main(
            [
                "run",
                "--seed-data", str(seed_csv),
                "--model", "all",
                "--dim", "16",
                "--folds", "3",
                "--repeats", "1",
                "--seed", "1",
                "--smote-mode", "none",
                "--out-dir", str(out_dir),
            ]
        )
        capsys.readouterr()
        if code != 0:
            failures.append(f"cmd_run exit code {code}")
        else:
            lines = (out_dir / "table_seed.txt").read_text().strip().splitlines()
            if lines[0] != TABLE_HEADER:
                failures.append("table header deviates from the 9-column layout")
            if any(len(line.split(" | ")) != 9 for line in lines[1:]):
                failures.append("table rows deviate from 9 columns")
        ok = report("report-fidelity (table layout)", not failures, "; ".join(failures))
        assert ok, failures

    def test_compare_window(self):
        # Comparison of the two transcribed baseline runs. The overall mean
        # delta is required to land in 1.5 +/- 0.8; the transcribed numbers
        # actually yield ~+0.503, so this check documents a real mismatch
        # between the published tables and the claimed overall increase.
        failures = []
        comparison = compare_reports(RUN_A, RUN_B)
        overall = comparison.overall_mean_delta
        if not (overall > 0.0):
            failures.append(f"overall mean delta {overall:.3f} not positive")
        if abs(overall - 1.5) > 0.8:
            failures.append(f"overall mean delta {overall:.3f} outside 1.5 +/- 0.8 window")
        ok = report(
            "report-fidelity (compare window)",
            not failures,
            f"overall mean delta {overall:+.3f}" if not failures else "; ".join(failures),
        )
        assert ok, failures


def random_qc_batch(rng, existing_pairs):
    from ccq.corpus import CodeCommentPair, Label

    pool = []
    for i in range(int(rng.integers(6, 14))):
        roll = rng.random()
        if roll < 0.2 and existing_pairs:
            source = existing_pairs[int(rng.integers(len(existing_pairs)))]
            pool.append(CodeCommentPair(f"b{i}", source.code, source.comment, Label.USEFUL))
        elif roll < 0.35:
            pool.append(CodeCommentPair(f"b{i}", f"int v{i} = {i};", "", None))
        elif roll < 0.5:
            pool.append(CodeCommentPair(f"b{i}", "prose with no syntax", f"comment number {i}", Label.USEFUL))
        else:
            pool.append(
                CodeCommentPair(
                    f"b{i}", f"int v{i} = {int(rng.integers(100))};", f"store constant {i}", Label.USEFUL
                )
            )
    return pool


class TestAugmentationQc:
    def test_fixture_counts_and_idempotence(self):
        from ccq.augmentation import QcRule, qc_filter
        from ccq.corpus import CodeCommentPair, Dataset, Label

        from test_augmentation import ten_row_batch

        failures = []
        existing = Dataset(
            pairs=(CodeCommentPair("s0", "int idx = 0;", "index into the table", Label.USEFUL),)
        )
        intake = qc_filter(ten_row_batch(existing), existing)
        counts = intake.rule_counts
        if len(intake.accepted) != 6:
            failures.append(f"accepted {len(intake.accepted)} != 6")
        if (counts[QcRule.DUPLICATE], counts[QcRule.INCOMPLETE], counts[QcRule.AMBIGUOUS]) != (2, 1, 1):
            failures.append(f"rule counts {counts}")

        rng = np.random.default_rng(31)
        for trial in range(100):
            batch = random_qc_batch(rng, existing.pairs)
            first = qc_filter(batch, existing)
            merged = Dataset(
                pairs=tuple(
                    CodeCommentPair(f"m{i}", p.code, p.comment, p.label)
                    for i, p in enumerate(existing.pairs + first.accepted.pairs)
                )
            )
            second = qc_filter(first.accepted.pairs, merged)
            if len(second.accepted) != 0:
                failures.append(f"idempotence violated on trial {trial}")
                break

        ok = report("augmentation-qc", not failures, "" if not failures else "; ".join(failures))
        assert ok, failures


class TestDeterminism:
    def _run(self, seed_csv, out_dir, jobs):
        code = cli_main(
            [
                "run",
                "--seed-data", str(seed_csv),
                "--model", "all",
                "--dim", "16",
                "--folds", "5",
                "--repeats", "2",
                "--seed", "7",
                "--smote-mode", "fold",
                "--k-neighbors", "3",
                "--jobs", str(jobs),
                "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        return (out_dir / "run_seed.json").read_bytes()

    def test_byte_identical_reports(self, tmp_path, capsys):
        failures = []
        seed_csv = tmp_path / "seed.csv"
        seed_csv.write_text(SMALL_CSV)

        sequential_a = self._run(seed_csv, tmp_path / "a", jobs=1)
        sequential_b = self._run(seed_csv, tmp_path / "b", jobs=1)
        parallel_a = self._run(seed_csv, tmp_path / "c", jobs=4)
        parallel_b = self._run(seed_csv, tmp_path / "d", jobs=4)
        capsys.readouterr()

        if sequential_a != sequential_b:
            failures.append("sequential runs differ byte-for-byte")
        if parallel_a != parallel_b:
            failures.append("--jobs 4 runs differ byte-for-byte")
        # Fold results must not depend on scheduling; only the jobs echo in
        # the config block may differ between jobs=1 and jobs=4 payloads.
        reports_seq = json.loads(sequential_a)["reports"]
        reports_par = json.loads(parallel_a)["reports"]
        if json.dumps(reports_seq, sort_keys=True) != json.dumps(reports_par, sort_keys=True):
            failures.append("jobs=1 and jobs=4 fold results differ")

        ok = report("determinism", not failures, "" if not failures else "; ".join(failures))
        assert ok, failures


@pytest.mark.skipif(
    not (os.environ.get("CCQ_SEED_CORPUS") and os.environ.get("EMBED_ENDPOINT")),
    reason="optional fidelity track needs CCQ_SEED_CORPUS and EMBED_ENDPOINT",
)
class TestOptionalFidelity:
    def test_nn_per_class_f1_near_published_values(self):
        # Non-binding: depends on the user-supplied corpus and a live
        # sidecar; expected within +-3 points of 88.401 (U) / 88.664 (NU).
        from ccq.corpus import load_dataset
        from ccq.embedding import ProviderConfig, embed_dataset, make_provider

        dataset = load_dataset(os.environ["CCQ_SEED_CORPUS"])
        provider = make_provider(ProviderConfig(kind="remote", dimension=768))
        features = embed_dataset(provider, dataset)
        result = evaluate_model(
            features,
            MlpConfig(),
            rng_seed=42,
            smote_config=SmoteConfig(rng_seed=42),
            smote_mode="global",
            jobs=2,
            variant="seed",
        )
        assert abs(result.metrics["f1_useful"] - 88.401) <= 3.0
        assert abs(result.metrics["f1_not_useful"] - 88.664) <= 3.0
