import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from g0contrast import __version__
from g0contrast.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from g0contrast.image import Raster, save_raster
from g0contrast.model import G0Params, sample_g0


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, list(csv.DictReader(io.StringIO(out))), err


def write_sample(path, values):
    path.write_text("\n".join(repr(float(v)) for v in values) + "\n")
    return str(path)


class TestFit:
    def test_consistency(self, capsys, tmp_path):
        f = write_sample(tmp_path / "s.txt", sample_g0(G0Params(-3, 2, 1), 10 ** 5, 1).values)
        code, rows, _ = run(capsys, "fit", f, "--looks", "1")
        assert code == EXIT_OK
        (row,) = rows
        assert float(row["alpha"]) == pytest.approx(-3, abs=0.15)
        a, g = float(row["alpha"]), float(row["gamma"])
        assert float(row["mu"]) == pytest.approx(-g / (1 + a), rel=1e-12)
        assert row["converged"] == "true" and row["n"] == "100000"

    def test_infinite_mean(self, capsys, tmp_path):
        f = write_sample(tmp_path / "s.txt", sample_g0(G0Params(-0.6, 1, 1), 5000, 2).values)
        code, rows, _ = run(capsys, "fit", f, "--looks", "1")
        assert code == EXIT_OK
        assert float(rows[0]["alpha"]) > -1
        assert rows[0]["mu"] == "inf"

    def test_round_trip_formatting(self, capsys, tmp_path):
        f = write_sample(tmp_path / "s.txt", sample_g0(G0Params(-3, 2, 1), 200, 3).values)
        _, rows, _ = run(capsys, "fit", f, "--looks", "1")
        from g0contrast.estimation import fit_ml
        from g0contrast.model import Sample
        ref = fit_ml(Sample(np.loadtxt(f), 1))
        assert float(rows[0]["alpha"]) == ref.alpha

    def test_empty_file(self, capsys, tmp_path):
        (tmp_path / "e.txt").write_text("# nothing\n")
        code, _, err = run(capsys, "fit", str(tmp_path / "e.txt"), "--looks", "1")
        assert code == EXIT_USAGE and "empty" in err

    def test_bad_value(self, capsys, tmp_path):
        (tmp_path / "b.txt").write_text("1.0\n-2.0\n3.0\n")
        code, _, err = run(capsys, "fit", str(tmp_path / "b.txt"), "--looks", "1")
        assert code == EXIT_DATA

    def test_unparsable_value(self, capsys, tmp_path):
        (tmp_path / "b.txt").write_text("1.0\nabc\n")
        code, _, err = run(capsys, "fit", str(tmp_path / "b.txt"), "--looks", "1")
        assert code == EXIT_DATA and "line 2" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "fit", str(tmp_path / "none.txt"), "--looks", "1")
        assert code == EXIT_DATA

    def test_not_converged(self, capsys, tmp_path):
        f = write_sample(tmp_path / "s.txt", sample_g0(G0Params(-3, 2, 1), 300, 3).values)
        code, rows, err = run(capsys, "fit", f, "--looks", "1", "--tol", "1e-300")
        assert code == EXIT_NUMERIC
        assert rows[0]["converged"] == "false" and "did not converge" in err


class TestDistance:
    def test_identical(self, capsys):
        code, rows, _ = run(capsys, "distance", "--p1", "-3,2,1", "--p2", "-3,2,1")
        assert code == EXIT_OK
        assert [r["kind"] for r in rows] == ["KL", "R", "H", "B", "JS", "AG", "T", "HM"]
        assert all(float(r["distance"]) == 0.0 for r in rows)

    def test_bhattacharyya_from_hellinger(self, capsys):
        code, rows, _ = run(capsys, "distance", "--p1", "-3,2,1", "--p2", "-5,4,1", "--kind", "H", "--kind", "B")
        d = {r["kind"]: float(r["distance"]) for r in rows}
        assert d["B"] == pytest.approx(-math.log1p(-d["H"]), abs=1e-12)

    def test_renyi_order(self, capsys):
        _, a, _ = run(capsys, "distance", "--p1", "-3,2,1", "--p2", "-5,4,1", "--kind", "R", "--beta", "0.5")
        _, b, _ = run(capsys, "distance", "--p1", "-3,2,1", "--p2", "-5,4,1", "--kind", "renyi:0.5")
        assert a == b

    def test_output_file(self, capsys, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["distance", "--p1", "-3,2,1", "--p2", "-5,4,1", "--out", str(out)]) == EXIT_OK
        assert out.read_text().startswith("kind,distance\n")

    @pytest.mark.parametrize("argv", [["distance", "--p1", "3,2,1", "--p2", "-3,2,1"],
                                      ["distance", "--p1", "-3,2", "--p2", "-3,2,1"],
                                      ["distance", "--p1", "-3,2,1", "--p2", "-3,2,1", "--kind", "XY"],
                                      ["distance", "--p1", "-3,2,1"],
                                      ["bogus"], []])
    def test_usage_errors(self, capsys, argv):
        assert main(argv) == EXIT_USAGE

    def test_positive_alpha_is_a_data_error(self, capsys):
        # parses as three numbers, but the law does not exist
        code = main(["distance", "--p1=3,2,1", "--p2=-3,2,1"])
        assert code in (EXIT_USAGE, EXIT_DATA)


class TestCurve:
    def test_reference_point(self, capsys):
        code, rows, _ = run(capsys, "curve", "--kind", "T", "--grid", "-14:-10:1")
        assert code == EXIT_OK
        assert [float(r["alpha"]) for r in rows] == [-14, -13, -12, -11, -10]
        d = {float(r["alpha"]): float(r["distance"]) for r in rows}
        assert d[-12] == 0.0 and all(v > 0 for a, v in d.items() if a != -12)

    @pytest.mark.parametrize("grid", ["-3:-5:1", "-3:-1:0", "a:b:c", "-3:-2"])
    def test_bad_grid(self, capsys, grid):
        assert main(["curve", "--kind", "T", "--grid", grid]) == EXIT_USAGE

    def test_alpha_out_of_range(self, capsys):
        assert main(["curve", "--kind", "T", "--grid", "-2:0:0.5"]) == EXIT_DATA


class TestTest:
    def test_identical_files(self, capsys, tmp_path):
        f = write_sample(tmp_path / "s.txt", sample_g0(G0Params(-3, 2, 1), 49, 1).values)
        code, rows, _ = run(capsys, "test", f, f, "--looks", "1", "--kind", "T")
        assert code == EXIT_OK
        (row,) = rows
        assert float(row["p_value"]) == 1.0 and row["reject"] == "false" and row["df"] == "2"

    def test_distinct_files(self, capsys, tmp_path):
        f1 = write_sample(tmp_path / "a.txt", sample_g0(G0Params(-1.5, 0.5, 1), 400, 1).values)
        f2 = write_sample(tmp_path / "b.txt", sample_g0(G0Params(-8, 70, 1), 400, 2).values)
        code, rows, _ = run(capsys, "test", f1, f2, "--looks", "1", "--level", "0.01")
        assert code == EXIT_OK and len(rows) == 8
        assert all(r["reject"] == "true" for r in rows)

    def test_bad_level(self, capsys, tmp_path):
        f = write_sample(tmp_path / "s.txt", [1.0, 2.0, 3.0])
        assert main(["test", f, f, "--looks", "1", "--level", "2"]) == EXIT_DATA


class TestSimulate:
    def test_cell(self, capsys):
        code, rows, _ = run(capsys, "simulate", "--preset", "size", "--cell", "-3,2,1", "--reps", "60",
                            "--valid", "10", "--workers", "1")
        assert code == EXIT_OK
        assert len(rows) == 16
        assert {r["valid_reps"] for r in rows} == {"10"}
        assert rows[0]["scenario"] == "null" and rows[0]["alpha1"] == "-3.0"

    def test_deterministic(self, capsys):
        argv = ["simulate", "--preset", "sample-size", "--cell", "-3,49", "--reps", "8", "--seed", "5"]
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv, "--threads", "2")
        assert a == b
        assert [r["kind"] for r in a[::2]] == ["KL", "T", "B", "AG"]

    @pytest.mark.parametrize("extra", [["--cell", "x"], ["--cell", "-3,9,1"], ["--reps", "0"],
                                       ["--levels", "0.5,2"], ["--preset", "nope"]])
    def test_usage(self, capsys, extra):
        argv = ["simulate", "--preset", "size", "--reps", "2"] + extra
        assert main(argv) == EXIT_USAGE


class TestAnalyze:
    def test_two_regions(self, capsys, tmp_path):
        p1, p2 = G0Params(-1.5, 0.5, 1), G0Params(-8, 70, 1)
        px = np.hstack([sample_g0(p1, 14 * 14, 1).values.reshape(14, 14),
                        sample_g0(p2, 14 * 14, 2).values.reshape(14, 14)])
        save_raster(Raster(px, 1), tmp_path / "r.txt")
        (tmp_path / "regions.txt").write_text("left 0 0 14 14\nright 0 14 14 14\n")
        code, rows, _ = run(capsys, "analyze", str(tmp_path / "r.txt"), str(tmp_path / "regions.txt"),
                            "--kind", "T")
        assert code == EXIT_OK
        assert [(r["scenario"], r["region1"], r["region2"]) for r in rows[::2]] == [
            ("same", "left", "left"), ("same", "right", "right"), ("cross", "left", "right")]
        assert all("pairs" in r for r in rows)
        assert rows[-1]["pairs"] == "16"

    def test_bad_raster(self, capsys, tmp_path):
        (tmp_path / "r.txt").write_text("2 2 1\n1 2 3 0\n")
        (tmp_path / "regions.txt").write_text("a 0 0 2 2\n")
        assert main(["analyze", str(tmp_path / "r.txt"), str(tmp_path / "regions.txt")]) == EXIT_DATA


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "g0contrast.cli", "distance", "--p1", "-3,2,1",
                           "--p2", "-3,2,1", "--kind", "KL"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["kind,distance", "KL,0.0"]
