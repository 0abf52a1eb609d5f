import json
import subprocess
import sys

import pytest

from seqrec.cli import parse_cutoff, run

SMALL = ["--physicians", "20", "--patients", "60", "--terms", "30", "--sequences", "300"]


@pytest.fixture
def synth_log(tmp_path):
    path = tmp_path / "synth.tsv"
    assert run(["synth", "--seed", "7", *SMALL, "--out", str(path)]) == 0
    return path


@pytest.mark.parametrize("cmd", [[], ["stats"], ["synth"], ["recommend"], ["evaluate"], ["sweep"]])
def test_help_exits_zero(cmd, capsys):
    assert run([*cmd, "--help"]) == 0
    assert "usage:" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["frobnicate"], ["stats", "--log", "x", "--bogus"], []])
def test_usage_errors_exit_one(argv, capsys):
    assert run(argv) == 1
    assert "usage:" in capsys.readouterr().err


def test_invalid_method_config_exits_one(synth_log, capsys):
    argv = ["evaluate", "--log", str(synth_log), "--cutoff", "2013-08-15", "--method", "fomc", "--alpha", "0.2"]
    assert run(argv) == 1
    assert "does not take alpha" in capsys.readouterr().err


def test_malformed_log_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("Y1\tP1\tV1\t1\ta\nY1\tP1\tV1\n")
    assert run(["stats", "--log", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_log_exits_two(tmp_path, capsys):
    assert run(["stats", "--log", str(tmp_path / "nope.tsv")]) == 2


def test_synth_deterministic(tmp_path):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    assert run(["synth", "--seed", "42", *SMALL, "--out", str(a)]) == 0
    assert run(["synth", "--seed", "42", *SMALL, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_stats_on_fixture(fixtures_dir, capsys):
    assert run(["stats", "--log", str(fixtures_dir / "small_corpus.tsv"), "--has-header", "--similarity"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_sequences"] == 14 and doc["total_sequence_length"] == 50
    assert set(doc["similarity"]) == {"physician", "patient", "term"}


def test_evaluate_one_row(synth_log, capsys):
    argv = [
        "evaluate", "--log", str(synth_log), "--cutoff", "2013-08-15", "--method", "dmcf-ypcf",
        "--sim", "p2y", "--alpha", "0.2", "--kp", "1", "--ky", "1", "--ns", "1,2,3,4,5",
    ]
    assert run(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[1].split("\t")[:6] == ["DmCF-ypCF", "simP2Y", "0.2", "1", "1", "-"]


def test_evaluate_json(synth_log, capsys):
    argv = ["evaluate", "--log", str(synth_log), "--cutoff", "2013-08-15", "--method", "fomc", "--format", "json"]
    assert run(argv) == 0
    (report,) = json.loads(capsys.readouterr().out)["reports"]
    assert report["cutoff"] == parse_cutoff("2013-08-15")
    assert list(report["hr"]) == ["1", "2", "3", "4", "5"]


def test_evaluate_without_test_cases_exits_two(synth_log, capsys):
    argv = ["evaluate", "--log", str(synth_log), "--cutoff", "2030-01-01", "--method", "fomc"]
    assert run(argv) == 2
    assert "no test cases" in capsys.readouterr().err


def test_recommend_cold_start(synth_log, capsys):
    argv = [
        "recommend", "--log", str(synth_log), "--method", "fomc", "--physician", "Y00",
        "--patient", "P00", "--last-term", "ekg",
    ]
    assert run(argv) == 0
    out, err = capsys.readouterr()
    assert json.loads(out)["topn"] == []
    assert "cold start" in err


def test_recommend_known_term(synth_log, capsys):
    first = synth_log.read_text().splitlines()[0].split("\t")
    argv = [
        "recommend", "--log", str(synth_log), "--method", "dmcf-tptcf", "--alpha", "0.5",
        "--kp", "5", "--beta", "0.1", "--physician", first[0], "--patient", first[1],
        "--last-term", first[4], "--topn", "3", "--normalize",
    ]
    assert run(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["query"]["last_term"] == first[4]
    assert 0 < len(doc["topn"]) <= 3


def test_sweep_tsv_and_parallel(synth_log, tmp_path):
    base = [
        "sweep", "--log", str(synth_log), "--cutoff", "2013-08-15", "--methods", "fomc,dmcf-tptcf",
        "--alphas", "0.1,0.5", "--kps", "1,10", "--betas", "0.5",
    ]
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    assert run([*base, "--out", str(a)]) == 0
    assert run([*base, "--jobs", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 1 + 4


def test_parse_cutoff():
    assert parse_cutoff("2013-08-15") == 1376524800
    assert parse_cutoff("1376524800") == 1376524800


def test_console_script_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "seqrec.cli", "synth", "--seed", "1", *SMALL],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.count("\n") > 300
