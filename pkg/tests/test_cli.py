import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from covkit import cli, metrics, scenarios


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_model(tmp_path, obj, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


class TestAnalyze:
    def test_csv_columns_and_values(self, tmp_path, capsys):
        out = tmp_path / "a.csv"
        code, text, _ = run(["analyze", "--model", "mimo.json", "--exposure", "0.3",
                             "--out", str(out)], capsys)
        assert code == 0
        assert "Sigma_J" in text
        header, rows = read_csv(out)
        assert header[0] == "T" and header[-1] == "balance_residual"
        assert header[1:5] == ["SigmaA_11", "SigmaA_12", "SigmaA_21", "SigmaA_22"]
        assert "SigmaS12_22" in header and len(header) == 18
        vals = dict(zip(header, map(float, rows[0])))
        pc, _ = metrics.pointing_covariances(scenarios.mimo_model(), 0.3)
        assert vals["SigmaJ_22"] == pc.sigma_J[1, 1]
        assert vals["SigmaS12_11"] == pc.sigma_S[0, 0] / 12
        assert rows[0][1] == f"{pc.sigma_A[0, 0]:.16e}"

    def test_balance_tolerance_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.TOL_ENV, "not-a-number")
        code, _, err = run(["analyze", "--model", "mimo.json", "--exposure", "0.3"], capsys)
        assert code == cli.EXIT_INPUT and cli.TOL_ENV in err
        monkeypatch.setenv(cli.TOL_ENV, "1e-300")
        code, _, _ = run(["analyze", "--model", "mimo.json", "--exposure", "0.3"], capsys)
        assert code in (cli.EXIT_OK, cli.EXIT_BALANCE)

    def test_dump_model(self, tmp_path, capsys):
        dump = tmp_path / "d.json"
        code, _, _ = run(["analyze", "--model", "first_order.json", "--exposure", "1",
                          "--dump-model", str(dump)], capsys)
        assert code == 0
        assert json.loads(dump.read_text())["A"] == [[-1.0]]


class TestExitCodes:
    def test_parse_error(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{"A": [[-1]],\n "B": [[1]] "C": [[1]]}')
        code, _, err = run(["validate", "--model", str(p)], capsys)
        assert code == cli.EXIT_PARSE
        assert "line 2" in err

    def test_unstable(self, tmp_path, capsys):
        p = write_model(tmp_path, {"A": [[0.5]], "B": [[1]], "C": [[1]]})
        code, _, err = run(["analyze", "--model", p, "--exposure", "1"], capsys)
        assert code == cli.EXIT_STABILITY
        assert "0.5" in err

    def test_feedthrough(self, tmp_path, capsys):
        p = write_model(tmp_path, {"A": [[-1]], "B": [[1]], "C": [[1]], "D": [[2]]})
        code, _, _ = run(["analyze", "--model", p, "--exposure", "1"], capsys)
        assert code == cli.EXIT_FEEDTHROUGH

    def test_bad_sweep_range(self, capsys):
        code, _, _ = run(["sweep", "--model", "mimo.json", "--tmin", "1", "--tmax", "0.1"], capsys)
        assert code == cli.EXIT_INPUT


class TestSweep:
    def test_endpoints_and_rows(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        code, _, _ = run(["sweep", "--model", "mimo.json", "--tmin", "0.01", "--tmax", "1",
                          "--points", "7", "--out", str(out)], capsys)
        assert code == 0
        header, rows = read_csv(out)
        T = [float(r[0]) for r in rows]
        assert len(rows) == 7 and T[0] == 0.01 and T[-1] == 1.0
        assert all(np.diff(T) > 0)
        assert max(float(r[-1]) for r in rows) <= 1e-8


class TestFreqresp:
    def test_db_columns(self, tmp_path, capsys):
        out = tmp_path / "f.csv"
        code, _, _ = run(["freqresp", "--model", "mimo.json", "--wmin", "1", "--wmax", "100",
                          "--points", "5", "--out", str(out)], capsys)
        assert code == 0
        header, rows = read_csv(out)
        assert header == ["omega", "G_11_dB", "G_12_dB", "G_21_dB", "G_22_dB", "singular"]
        assert float(rows[0][1]) == pytest.approx(0.0, abs=0.2)  # unit DC gain at 1 rad/s

    def test_singular_row_flagged(self, tmp_path, capsys):
        p = write_model(tmp_path, {"A": [[0, 1], [-1, 0]], "B": [[0], [1]], "C": [[1, 0]]})
        out = tmp_path / "f.csv"
        code, _, err = run(["freqresp", "--model", p, "--wmin", "0.5", "--wmax", "2",
                            "--points", "3", "--out", str(out)], capsys)
        assert code == cli.EXIT_SINGULAR
        _, rows = read_csv(out)
        assert [r[-1] for r in rows] == ["0", "1", "0"]
        assert rows[1][1] == "nan"
        assert "omega = 1" in err


class TestSimulate:
    def test_rows_and_reproducibility(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--model", "first_order.json", "--exposure", "1", "--step", "0.05",
                "--trials", "200", "--seed", "5"]
        assert run(args + ["--out", str(a)], capsys)[0] == 0
        assert run(args + ["--out", str(b)], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        header, rows = read_csv(a)
        assert header == ["metric", "i", "j", "estimate", "stderr", "analytic", "z"]
        assert [r[0] for r in rows] == ["SigmaA", "SigmaD", "SigmaS", "SigmaJ"]


class TestValidate:
    def test_report(self, capsys):
        code, text, _ = run(["validate", "--model", "satellite/nominal_f1.json"], capsys)
        assert code == 0
        assert "n_x = 33, n_u = 3, n_p = 2" in text
        assert "stable" in text and "feedthrough: D = 0" in text
        assert "well-posed" in text

    def test_unstable_and_feedthrough_reported(self, tmp_path, capsys):
        p = write_model(tmp_path, {"A": [[0.2]], "B": [[1]], "C": [[1]], "D": [[1]]})
        code, text, _ = run(["validate", "--model", p], capsys)
        assert code == cli.EXIT_STABILITY
        assert "UNSTABLE" in text and "WARNING feedthrough" in text


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "covkit.cli", "validate", "--model", "mimo.json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "n_x = 8" in proc.stdout
