import subprocess
import sys

import pytest

from rumourseq import ingest
from rumourseq.cli import ExperimentConfig, main

from synthetic import make_dataset, write_pheme


@pytest.fixture
def normalized(tmp_path):
    path = tmp_path / "data.jsonl"
    ingest.export_normalized(make_dataset(1, sizes=(40, 35, 30)), path)
    return path


def test_ingest_pheme_writes_summary(tmp_path, capsys):
    root = write_pheme(make_dataset(1, sizes=(12, 10)), tmp_path / "pheme")
    out = tmp_path / "out" / "data.jsonl"
    assert main(["ingest", "--pheme", str(root), "--out", str(out)]) == 0
    summary = (tmp_path / "out" / "data.jsonl.summary.tsv").read_text()
    assert summary == capsys.readouterr().out
    assert summary.splitlines()[-1].startswith("Total\t") and summary.splitlines()[-1].endswith("\t22")
    assert len(ingest.load_normalized(out)) == 22


def test_ingest_missing_dir_fails_without_output(tmp_path):
    out = tmp_path / "data.jsonl"
    assert main(["ingest", "--pheme", str(tmp_path / "nope"), "--out", str(out)]) == 2
    assert not out.exists()


def test_usage_errors(tmp_path):
    assert main([]) == 1
    assert main(["ingest", "--out", str(tmp_path / "x")]) == 1
    assert main(["run", "--classifier", "bogus"]) == 1
    assert main(["run"]) == 1


def test_run_is_deterministic(normalized, tmp_path, capsys):
    argv = ["run", "--dataset", str(normalized), "--classifier", "crf", "--dim", "10", "--epochs", "2"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("classifier=crf features=both P=")
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    for f in ("report.json", "folds.tsv", "deciles.tsv", "predictions.tsv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_config_file_round_trip(normalized, tmp_path):
    assert main(["run", "--dataset", str(normalized), "--classifier", "enquiry", "--out", str(tmp_path / "a")]) == 0
    cfg = ExperimentConfig.from_ini(tmp_path / "a" / "config.ini")
    assert cfg.settings.classifier == "enquiry"
    assert main(["run", "--config", str(tmp_path / "a" / "config.ini"), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_unknown_config_key(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[experiment]\nbogus = 1\n")
    assert main(["run", "--config", str(ini)]) == 1


def test_analyze_tables(normalized, tmp_path):
    run_dir = tmp_path / "run"
    assert main(["run", "--dataset", str(normalized), "--classifier", "nb", "--features", "social",
                 "--out", str(run_dir)]) == 0
    assert main(["analyze", "--dataset", str(normalized), "--report", str(run_dir), "--out", str(tmp_path / "an")]) == 0
    deciles = (tmp_path / "an" / "decile_f1.tsv").read_text().splitlines()
    assert deciles[0].split("\t") == ["event", "decile", "tp", "fp", "fn", "tn", "f1", "flag"]
    assert len(deciles) == 1 + 3 * 10
    ratios = (tmp_path / "an" / "rumour_ratios.tsv").read_text().splitlines()
    assert len(ratios) == 1 + 3 * 10


def test_module_entry_point(normalized, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rumourseq", "analyze", "--dataset", str(normalized),
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "rumour-ratio" in proc.stdout
