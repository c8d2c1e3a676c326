import json
import math
import subprocess
import sys

import pytest

from bonkl.cli import main

from oracles import example1_kl

DIST = "outcome_id\treward\tprob\nlo\t0\t0.5\nhi\t1\t0.5\n"


def run(argv, capsys):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def dist(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text(DIST)
    return str(path)


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("BON_SEED", raising=False)


class TestCommands:
    def test_pmf(self, dist, capsys):
        code, out, _ = run(["pmf", "--dist", dist, "--n", "3"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "outcome_id\treward\tprob\tbon_prob"
        assert float(lines[1].split("\t")[3]) == pytest.approx(0.125, abs=1e-15)

    def test_report(self, capsys):
        code, out, _ = run(["report", "--builtin", "example1", "--n", "4"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["exact_kl"] == pytest.approx(example1_kl(4), abs=1e-12)
        assert rep["formula"] == pytest.approx(math.log(4) - 0.75, abs=1e-15)

    def test_sweep_stdout(self, capsys):
        code, out, _ = run(["sweep", "--builtin", "uniform(10)", "--n-grid", "1,10,100"], capsys)
        assert code == 0
        assert out.splitlines()[0].startswith("n,exact_kl,formula")
        assert len(out.splitlines()) == 4

    def test_sweep_files(self, tmp_path, capsys):
        csv, svg = tmp_path / "s.csv", tmp_path / "s.svg"
        argv = ["sweep", "--builtin", "example1", "--n-grid", "1:30", "--out", str(csv), "--svg", str(svg)]
        code, out, _ = run(argv, capsys)
        assert code == 0 and out == ""
        assert len(csv.read_text().splitlines()) == 31
        assert svg.read_text().count("<polyline") == 4

    def test_mc_var(self, capsys):
        argv = ["mc-var", "--builtin", "example1", "--n-grid", "5", "--mc-samples", "20000"]
        code, out, _ = run(argv, capsys)
        assert code == 0
        header, row = out.splitlines()
        assert dict(zip(header.split(","), row.split(",")))["proposed_within_5se"] == "1"

    def test_reproduce(self, tmp_path, capsys):
        code, out, _ = run(["reproduce", "--figure", "2", "--L", "10", "--out-dir", str(tmp_path)], capsys)
        assert code == 0
        assert (tmp_path / "fig2_uniform_L10.csv").exists()
        assert "uniform(10)" in out

    def test_jitter(self, tmp_path, capsys):
        path = tmp_path / "tie.tsv"
        path.write_text("outcome_id\treward\tprob\na\t1\t0.5\nb\t1\t0.5\n")
        code, _, err = run(["pmf", "--dist", str(path), "--n", "2"], capsys)
        assert code == 2 and json.loads(err)["error"] == "DuplicateReward"
        code, out, _ = run(["pmf", "--dist", str(path), "--n", "2", "--jitter", "1e-9"], capsys)
        assert code == 0 and len(out.splitlines()) == 3


class TestErrors:
    @pytest.mark.parametrize(
        "argv, code, kind",
        [
            (["pmf", "--builtin", "example1", "--n", "0"], 3, "InvalidN"),
            (["report", "--builtin", "example1", "--n", "100000000"], 3, "InvalidN"),
            (["pmf", "--builtin", "nonsense", "--n", "2"], 2, "UnknownScenario"),
            (["sweep", "--builtin", "example1", "--n-grid", "3,1"], 2, "ConfigError"),
            (["pmf", "--dist", "/nonexistent/file.tsv", "--n", "2"], 2, "ParseError"),
            (["mc-var", "--builtin", "example1", "--n-grid", "2", "--mc-samples", "1"], 2, "ConfigError"),
            (["reproduce", "--figure", "1", "--L", "10"], 2, "ConfigError"),
            (["pmf", "--n", "2"], 2, "UsageError"),
            (["frobnicate"], 2, "UsageError"),
        ],
    )
    def test_exit_codes(self, argv, code, kind, capsys):
        got, out, err = run(argv, capsys)
        assert got == code
        assert out == ""
        assert len(err.splitlines()) == 1
        payload = json.loads(err)
        assert payload["error"] == kind and payload["message"]

    def test_bad_env_seed(self, monkeypatch, capsys):
        monkeypatch.setenv("BON_SEED", "abc")
        code, _, err = run(["sweep", "--builtin", "example1", "--n-grid", "2"], capsys)
        assert code == 2 and json.loads(err)["error"] == "ConfigError"


class TestSeeds:
    ARGV = ["sweep", "--builtin", "uniform(6)", "--n-grid", "1,4", "--mc-samples", "3000"]

    def test_env_fallback(self, monkeypatch, capsys):
        _, explicit, _ = run(self.ARGV + ["--seed", "17"], capsys)
        monkeypatch.setenv("BON_SEED", "17")
        _, from_env, _ = run(self.ARGV, capsys)
        assert explicit == from_env

    def test_flag_beats_env(self, monkeypatch, capsys):
        _, explicit, _ = run(self.ARGV + ["--seed", "17"], capsys)
        monkeypatch.setenv("BON_SEED", "99")
        _, flagged, _ = run(self.ARGV + ["--seed", "17"], capsys)
        assert explicit == flagged

    def test_default_zero(self, capsys):
        _, a, _ = run(self.ARGV, capsys)
        _, b, _ = run(self.ARGV + ["--seed", "0"], capsys)
        _, c, _ = run(self.ARGV + ["--seed", "1"], capsys)
        assert a == b and a != c


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bonkl", "report", "--builtin", "example1", "--n", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 2
