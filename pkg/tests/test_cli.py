import json

import pytest

from repsumm.cli import main
from repsumm.corpus import group, ingest


def run(args, capsys=None):
    return main([str(a) for a in args])


def pipeline_to_labeled(tmp_path, funds=8, seed=3, tau=None):
    corpus_path = tmp_path / "corpus.jsonl"
    assert run(["gen-synthetic", "--funds", funds, "--seed", seed, "--out", corpus_path]) == 0
    assert run(["split", corpus_path, "--seed", seed, "--out-dir", tmp_path / "splits"]) == 0
    label_args = [
        "label", "--split-dir", tmp_path / "splits", "--out-dir", tmp_path / "labeled",
    ]
    if tau is not None:
        label_args += ["--tau", tau]
    assert run(label_args) == 0
    return tmp_path / "splits", tmp_path / "labeled"


class TestCommands:
    def test_gen_synthetic_contract(self, tmp_path):
        out = tmp_path / "corpus.jsonl"
        assert run(["gen-synthetic", "--funds", 10, "--seed", 7, "--out", out,
                    "--truth", tmp_path / "truth.jsonl"]) == 0
        groups = group(ingest(out))
        assert len(groups) == 10
        assert all(len(g.monthlies) == 6 for g in groups)
        assert (tmp_path / "truth.jsonl").exists()

    def test_ingest_reports_counts(self, tmp_path, capsys):
        out = tmp_path / "corpus.jsonl"
        run(["gen-synthetic", "--funds", 3, "--seed", 1, "--out", out])
        assert run(["ingest", out]) == 0
        assert "21 documents in 3 groups" in capsys.readouterr().out

    def test_ingest_invalid_corpus_exits_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"doc_id": "A"}\n', encoding="utf-8")
        assert run(["ingest", bad]) == 1
        assert "invalid field" in capsys.readouterr().err

    def test_missing_file_exits_two(self, tmp_path):
        assert run(["ingest", tmp_path / "nope.jsonl"]) == 2

    def test_split_is_reproducible_on_disk(self, tmp_path):
        out = tmp_path / "corpus.jsonl"
        run(["gen-synthetic", "--funds", 10, "--seed", 2, "--out", out])
        for d in ("s1", "s2"):
            assert run(["split", out, "--ratios", "0.7,0.1,0.2", "--seed", "1",
                        "--out-dir", tmp_path / d]) == 0
        for name in ("train.jsonl", "validation.jsonl", "test.jsonl", "split.json"):
            assert (tmp_path / "s1" / name).read_bytes() == (tmp_path / "s2" / name).read_bytes()

    def test_evaluate_without_scorer_exits_one(self, tmp_path, capsys):
        split_dir, labeled = pipeline_to_labeled(tmp_path)
        code = run([
            "evaluate", "--split-dir", split_dir, "--method", "ex-native",
            "--model", labeled / "tfidf.json", "--scorer", tmp_path / "missing.json",
            "--out", tmp_path / "report.csv",
        ])
        assert code == 1
        assert "missing required artifact" in capsys.readouterr().err

    def test_full_native_pipeline(self, tmp_path, capsys):
        split_dir, labeled = pipeline_to_labeled(tmp_path)
        scorer = tmp_path / "scorer.json"
        assert run(["train", "--labeled-dir", labeled, "--epochs", 9, "--batch", 4,
                    "--out", scorer]) == 0
        report = tmp_path / "report.csv"
        assert run([
            "evaluate", "--split-dir", split_dir, "--method", "ex-native",
            "--scorer", scorer, "--model", labeled / "tfidf.json",
            "--budget", "sentences:6", "--out", report,
            "--markdown", tmp_path / "report.md", "--dump", tmp_path / "groups.jsonl",
        ]) == 0
        lines = report.read_text().splitlines()
        assert lines[0].startswith("method,asset_class,region,n_groups")
        assert lines[1].startswith("ex-native,all,all,")
        assert (tmp_path / "report.md").exists()
        assert (tmp_path / "groups.jsonl").exists()

    def test_summarize_writes_one_line_per_group(self, tmp_path):
        split_dir, labeled = pipeline_to_labeled(tmp_path)
        scorer = tmp_path / "scorer.json"
        run(["train", "--labeled-dir", labeled, "--out", scorer])
        out = tmp_path / "summaries.jsonl"
        assert run(["summarize", "--split-dir", split_dir, "--scorer", scorer,
                    "--model", labeled / "tfidf.json", "--out", out]) == 0
        lines = out.read_text().splitlines()
        manifest = json.loads((split_dir / "split.json").read_text())
        assert len(lines) == len(manifest["groups"]["test"])
        assert all("summary" in json.loads(l) for l in lines)

    def test_remote_methods_against_stub(self, tmp_path, stub_server):
        split_dir, labeled = pipeline_to_labeled(tmp_path, funds=6)
        for method in ("ex-remote", "ab-remote"):
            report = tmp_path / f"{method}.csv"
            assert run([
                "evaluate", "--split-dir", split_dir, "--method", method,
                "--service-url", stub_server.url, "--out", report,
            ]) == 0
            assert report.exists()

    def test_remote_without_service_exits_two(self, tmp_path, capsys):
        split_dir, labeled = pipeline_to_labeled(tmp_path, funds=6)
        code = run([
            "evaluate", "--split-dir", split_dir, "--method", "ab-remote",
            "--service-url", "http://127.0.0.1:9", "--out", tmp_path / "r.csv",
        ])
        assert code == 2
        assert "service unavailable" in capsys.readouterr().err

    def test_config_file_presets_flags(self, tmp_path, capsys):
        corpus_path = tmp_path / "corpus.jsonl"
        run(["gen-synthetic", "--funds", 5, "--seed", 3, "--out", corpus_path])
        run(["split", corpus_path, "--seed", 3, "--out-dir", tmp_path / "splits"])
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"tau": 0.25, "out_dir": str(tmp_path / "labeled")}))
        assert run(["--config", config, "label", "--split-dir", tmp_path / "splits"]) == 0
        assert "tau=0.25" in capsys.readouterr().out
        assert (tmp_path / "labeled" / "tfidf.json").exists()

    def test_explicit_flag_beats_config(self, tmp_path, capsys):
        corpus_path = tmp_path / "corpus.jsonl"
        run(["gen-synthetic", "--funds", 5, "--seed", 3, "--out", corpus_path])
        run(["split", corpus_path, "--seed", 3, "--out-dir", tmp_path / "splits"])
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"tau": 0.25}))
        assert run(["--config", config, "label", "--split-dir", tmp_path / "splits",
                    "--tau", 0.9, "--out-dir", tmp_path / "labeled"]) == 0
        assert "tau=0.9" in capsys.readouterr().out

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["split", "x.jsonl", "--no-such-flag"])
        assert exc.value.code == 2

    def test_bad_ratios_exit_one(self, tmp_path):
        out = tmp_path / "corpus.jsonl"
        run(["gen-synthetic", "--funds", 4, "--seed", 0, "--out", out])
        assert run(["split", out, "--ratios", "0.5,0.5,0.5", "--seed", 0,
                    "--out-dir", tmp_path / "s"]) == 1

    def test_service_url_env_default(self, tmp_path, stub_server, monkeypatch):
        monkeypatch.setenv("REPSUMM_SERVICE_URL", stub_server.url)
        split_dir, _ = pipeline_to_labeled(tmp_path, funds=6)
        report = tmp_path / "env.csv"
        assert run(["evaluate", "--split-dir", split_dir, "--method", "ab-remote",
                    "--out", report]) == 0
        assert report.exists()
