"""Command-line interface: subcommands, file modes, exit codes, determinism."""

import numpy as np
import pytest

from pdsparse import cli
from pdsparse.matio import read_table, write_matrix


def drop_time(text):
    """Remove the time_ms column so runs can be compared byte for byte."""
    lines = text.strip().split("\n")
    cols = lines[0].split(",")
    keep = [i for i, c in enumerate(cols) if c != "time_ms"]
    return "\n".join(",".join(line.split(",")[i] for i in keep) for line in lines)


def run_ok(argv, capsys):
    assert cli.main(argv) == 0
    return capsys.readouterr().out


class TestTables:
    def test_cs_table_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        stdout = run_ok(["cs-table", "--n", "40", "--p", "120", "--r", "3,5",
                         "--trials", "2", "--seed", "7", "--out", str(out)], capsys)
        assert "ns=" in stdout and str(out) in stdout
        columns, rows = read_table(out)
        assert columns == ("r", "ns", "mse_mean", "time_ms", "iters")
        assert [row["r"] for row in rows] == [3, 5]

    def test_deterministic_bytes_across_jobs(self, tmp_path, capsys):
        texts = []
        for i, jobs in enumerate((1, 1, 3)):
            out = tmp_path / f"t{i}.csv"
            run_ok(["cs-table", "--n", "24", "--p", "72", "--r", "2,3",
                    "--trials", "3", "--seed", "11", "--jobs", str(jobs),
                    "--out", str(out)], capsys)
            texts.append(drop_time(out.read_text()))
        assert texts[0] == texts[1] == texts[2]

    def test_tradeoff_writes_baseline_sibling(self, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        stdout = run_ok(["tradeoff", "--n", "12", "--p", "36", "--r", "4",
                         "--trials", "1", "--seed", "3", "--out", str(out)], capsys)
        sibling = tmp_path / "curve.iht.csv"
        assert sibling.exists() and str(sibling) in stdout
        columns, rows = read_table(out)
        assert [row["r"] for row in rows] == [1, 2, 3, 4]

    def test_covsel_table_pm1(self, capsys):
        stdout = run_ok(["covsel-table", "--p", "10", "--trials", "1",
                         "--seed", "9", "--pattern", "pm1-sparse"], capsys)
        assert "likelihood=" in stdout and "support_pct=" in stdout

    def test_logistic_generated(self, capsys):
        stdout = run_ok(["logistic", "--n", "40", "--p", "6", "--r", "3",
                         "--trials", "1", "--seed", "5"], capsys)
        assert "loss=" in stdout and "error_pct=" in stdout

    def test_counterexample(self, capsys):
        stdout = run_ok(["counterexample", "--n", "5", "--seed", "2",
                         "--exponent", "0.5"], capsys)
        lines = [l for l in stdout.splitlines() if l.startswith("r=")]
        assert len(lines) == 2
        assert lines[0].startswith("r=2")


class TestFileModes:
    @pytest.fixture
    def cs_files(self, tmp_path, rng):
        a = rng.standard_normal((16, 48))
        u = np.zeros(48)
        u[[4, 20, 33]] = [1.0, -2.0, 0.5]
        write_matrix(tmp_path / "a.csv", a)
        write_matrix(tmp_path / "b.csv", a @ u)
        return str(tmp_path / "a.csv"), str(tmp_path / "b.csv")

    def test_cs_noiseless_from_files(self, cs_files, tmp_path, capsys):
        matrix, rhs = cs_files
        out = tmp_path / "sol.csv"
        stdout = run_ok(["cs-noiseless", "--matrix", matrix, "--rhs", rhs,
                         "--out", str(out)], capsys)
        assert "r=3" in stdout
        columns, rows = read_table(out)
        assert columns == ("r", "residual", "time_ms", "iters")
        assert rows[0]["r"] == 3 and rows[0]["residual"] < 1e-8

    def test_cs_noisy_from_files(self, cs_files, capsys):
        matrix, rhs = cs_files
        stdout = run_ok(["cs-noisy", "--matrix", matrix, "--rhs", rhs,
                         "--r", "3"], capsys)
        assert "residual=" in stdout

    def test_logistic_from_file(self, tmp_path, rng, capsys):
        feats = rng.standard_normal((30, 4))
        outcomes = np.where(feats[:, 0] > 0, 1.0, -1.0)
        write_matrix(tmp_path / "d.csv", np.column_stack([outcomes, feats]))
        stdout = run_ok(["logistic", "--data", str(tmp_path / "d.csv"),
                         "--r", "2"], capsys)
        assert "error_pct=" in stdout

    def test_covsel_from_file(self, tmp_path, rng, capsys):
        m = rng.standard_normal((20, 6))
        write_matrix(tmp_path / "s.csv", m.T @ m / 20 + 0.5 * np.eye(6))
        stdout = run_ok(["covsel", "--matrix", str(tmp_path / "s.csv"),
                         "--r", "4"], capsys)
        assert "likelihood=" in stdout

    def test_matrix_without_rhs_rejected(self, cs_files, capsys):
        matrix, _ = cs_files
        assert cli.main(["cs-noiseless", "--matrix", matrix]) == 2
        assert "go together" in capsys.readouterr().err


class TestExitCodes:
    def test_invalid_dimensions(self, capsys):
        assert cli.main(["cs-table", "--n", "8", "--p", "4", "--r", "2"]) == 2
        assert "pdsparse:" in capsys.readouterr().err

    def test_argparse_rejections(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["cs-table", "--r", "two"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            cli.main(["mystery-command"])
        assert exc.value.code == 2

    def test_numeric_failure(self, tmp_path, capsys):
        write_matrix(tmp_path / "a.csv", np.ones((2, 2)))
        write_matrix(tmp_path / "b.csv", np.array([1.0, 2.0]))
        code = cli.main(["cs-noiseless", "--matrix", str(tmp_path / "a.csv"),
                         "--rhs", str(tmp_path / "b.csv")])
        assert code == 3
        assert "rank" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        code = cli.main(["cs-noiseless", "--matrix", str(tmp_path / "no.csv"),
                         "--rhs", str(tmp_path / "no2.csv")])
        assert code == 4
        capsys.readouterr()

    def test_malformed_data(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n1,spam\n")
        code = cli.main(["cs-noiseless", "--matrix", str(path), "--rhs", str(path)])
        assert code == 4
        capsys.readouterr()
