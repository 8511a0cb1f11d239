import json

import pytest

from ccq.cli import main
from ccq.evaluation import TABLE_HEADER

SMALL_CSV = "code,comment,label\n" + "".join(
    f'"int x{i} = {i};","set value {i}",{"Useful" if i % 3 else "Not Useful"}\n'
    for i in range(30)
)


@pytest.fixture
def seed_csv(tmp_path):
    path = tmp_path / "seed.csv"
    path.write_text(SMALL_CSV, encoding="utf-8")
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestIngestAndStats:
    def test_ingest_prints_table_and_writes_cache(self, seed_csv, tmp_path, capsys):
        out = tmp_path / "cache.jsonl"
        assert run_cli("ingest", seed_csv, "--out", out) == 0
        printed = capsys.readouterr().out
        assert "Useful" in printed and "Total" in printed
        assert out.exists()
        assert len(out.read_text().strip().splitlines()) == 30

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert run_cli("ingest", tmp_path / "nope.csv") == 2
        assert "not found" in capsys.readouterr().err

    def test_bad_row_exits_3_with_line(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text('code,comment,label\n"int a;","ok",Useful\nbroken-row\n')
        assert run_cli("ingest", path) == 3
        assert "line 3" in capsys.readouterr().err

    def test_stats_prints_distribution(self, seed_csv, capsys):
        assert run_cli("stats", seed_csv) == 0
        assert "useful" in capsys.readouterr().out.lower()


class TestEmbed:
    def test_embed_writes_cache(self, seed_csv, tmp_path, capsys):
        cache = tmp_path / "vectors.jsonl"
        code = run_cli(
            "embed", "--dataset", seed_csv, "--dim", "32", "--cache", cache, "--seed", "7"
        )
        assert code == 0
        assert cache.exists()
        assert "30 x 32" in capsys.readouterr().out.replace("features", "").strip()


class TestRun:
    def run_small(self, seed_csv, tmp_path, *extra):
        out_dir = tmp_path / "out"
        code = run_cli(
            "run",
            "--seed-data", seed_csv,
            "--model", "all",
            "--dim", "16",
            "--folds", "3",
            "--repeats", "1",
            "--seed", "5",
            "--smote-mode", "none",
            "--out-dir", out_dir,
            *extra,
        )
        return code, out_dir

    def test_paper_table_layout(self, seed_csv, tmp_path, capsys):
        code, out_dir = self.run_small(seed_csv, tmp_path)
        assert code == 0
        printed = capsys.readouterr().out
        table = (out_dir / "table_seed.txt").read_text()
        lines = table.strip().splitlines()
        assert lines[0] == TABLE_HEADER
        assert [line.split(" | ")[0] for line in lines[1:]] == ["RF", "VC", "NN"]
        for line in lines[1:]:
            assert len(line.split(" | ")) == 9
        assert TABLE_HEADER in printed

    def test_report_embeds_config_and_version(self, seed_csv, tmp_path):
        code, out_dir = self.run_small(seed_csv, tmp_path)
        payload = json.loads((out_dir / "run_seed.json").read_text())
        assert payload["tool"]["name"] == "ccq"
        assert payload["config"]["seed"] == 5
        assert payload["config"]["folds"] == 3
        assert len(payload["reports"]) == 3

    def test_seed_llm_variant_without_data_exits_4(self, seed_csv, tmp_path, capsys):
        code = run_cli(
            "run", "--seed-data", seed_csv, "--variant", "seed+llm", "--out-dir", tmp_path
        )
        assert code == 4
        assert "generated-data" in capsys.readouterr().err

    def test_seed_llm_variant_merges(self, seed_csv, tmp_path):
        generated = tmp_path / "generated.jsonl"
        generated.write_text(
            "\n".join(
                json.dumps({"code": f"while (k{i}--) {{}}", "comment": f"spin {i} times", "label": "Useful"})
                for i in range(12)
            )
        )
        out_dir = tmp_path / "out"
        code = run_cli(
            "run",
            "--seed-data", seed_csv,
            "--generated-data", generated,
            "--variant", "seed+llm",
            "--model", "nn",
            "--dim", "16",
            "--folds", "3",
            "--repeats", "1",
            "--smote-mode", "none",
            "--out-dir", out_dir,
        )
        assert code == 0
        payload = json.loads((out_dir / "run_seed_llm.json").read_text())
        assert payload["reports"][0]["variant"] == "seed+llm"

    def test_config_file_supplies_defaults_flags_win(self, seed_csv, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"folds": 3, "repeats": 1, "dim": 16, "smote-mode": "none", "model": "rf"}))
        out_dir = tmp_path / "out"
        code = run_cli(
            "--config", config,
            "run",
            "--seed-data", seed_csv,
            "--seed", "9",
            "--out-dir", out_dir,
        )
        assert code == 0
        payload = json.loads((out_dir / "run_seed.json").read_text())
        assert payload["config"]["folds"] == 3  # from config file
        assert payload["config"]["seed"] == 9  # flag wins over default


class TestCompare:
    def _write_run(self, seed_csv, tmp_path, name, seed):
        out_dir = tmp_path / name
        code = run_cli(
            "run",
            "--seed-data", seed_csv,
            "--model", "rf",
            "--dim", "16",
            "--folds", "3",
            "--repeats", "1",
            "--seed", str(seed),
            "--smote-mode", "none",
            "--out-dir", out_dir,
        )
        assert code == 0
        return out_dir / "run_seed.json"

    def test_identical_reports_zero_deltas(self, seed_csv, tmp_path, capsys):
        report = self._write_run(seed_csv, tmp_path, "a", 5)
        out = tmp_path / "cmp.json"
        assert run_cli("compare", report, report, "--out", out) == 0
        payload = json.loads(out.read_text())
        assert payload["overall_mean_delta"] == 0.0
        assert all(row["delta"] == 0.0 for row in payload["rows"])

    def test_different_runs_compare(self, seed_csv, tmp_path):
        a = self._write_run(seed_csv, tmp_path, "a", 5)
        b = self._write_run(seed_csv, tmp_path, "b", 6)
        out = tmp_path / "cmp.json"
        assert run_cli("compare", a, b, "--out", out) == 0
        payload = json.loads(out.read_text())
        assert len(payload["rows"]) == 7  # one model, seven metrics

    def test_mismatched_model_sets_exit_5(self, seed_csv, tmp_path):
        a = self._write_run(seed_csv, tmp_path, "a", 5)
        payload = json.loads(a.read_text())
        payload["reports"][0]["model"] = "Other"
        b = tmp_path / "edited.json"
        b.write_text(json.dumps(payload))
        assert run_cli("compare", a, b) == 5

    def test_missing_report_exits_2(self, tmp_path):
        assert run_cli("compare", tmp_path / "nope.json", tmp_path / "nope2.json") == 2


class TestAugment:
    def test_from_file_pipeline(self, seed_csv, tmp_path, capsys):
        raw = tmp_path / "raw.txt"
        raw.write_text(
            "Here you go:\n"
            '{"code": "int a = 1;", "comment": "set a to one", "label": "Useful"}\n'
            '{"code": "int b = 2;", "comment": "set b to two", "label": "Not Useful"}\n'
            '{"code": "int b = 2;", "comment": "set b to two", "label": "Not Useful"}\n'
        )
        out_dir = tmp_path / "intake"
        code = run_cli(
            "augment", "--from-file", raw, "--existing", seed_csv, "--out-dir", out_dir
        )
        assert code == 0
        accepted = (out_dir / "accepted.jsonl").read_text().strip().splitlines()
        assert len(accepted) == 2
        report = json.loads((out_dir / "intake_report.json").read_text())
        assert report["rule_counts"]["Duplicate"] == 1

    def test_unparseable_generation_exits_7(self, tmp_path):
        raw = tmp_path / "raw.txt"
        raw.write_text("nothing structured here\n")
        assert run_cli("augment", "--from-file", raw, "--out-dir", tmp_path) == 7

    def test_all_rejected_exits_8(self, seed_csv, tmp_path):
        raw = tmp_path / "raw.txt"
        raw.write_text('{"code": "int x;", "comment": ""}\n')
        assert run_cli("augment", "--from-file", raw, "--out-dir", tmp_path) == 8

    def test_missing_endpoint_and_file_exits_4(self, tmp_path):
        assert run_cli("augment", "--out-dir", tmp_path) == 4

    def test_missing_credential_exits_6(self, tmp_path, monkeypatch):
        monkeypatch.delenv("LLM_API_KEY", raising=False)
        code = run_cli(
            "augment", "--endpoint", "http://127.0.0.1:9/v1", "--out-dir", tmp_path
        )
        assert code == 6
