from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from alphamu import cli
from alphamu.presets import FIGURES


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO("".join(l for l in text.splitlines(True)
                                                     if not l.startswith("#")))))


class TestSeriesCommands:
    def test_pdf_single_point(self, capsys):
        code, out, _ = run(capsys, "pdf", "--alpha", "0.8", "--mu", "0.2", "--rhat", "5", "--L", "3", "--r", "2")
        assert code == 0
        (row,) = rows(out)
        assert float(row["value"]) == pytest.approx(0.0621863537411665, abs=1e-13)
        assert int(row["n_terms"]) > 0
        assert float(row["bound"]) <= 1e-12
        assert out.splitlines()[0] == "r,value,n_terms,bound"

    def test_rayleigh_cdf(self, capsys):
        code, out, _ = run(capsys, "cdf", "--alpha", "2", "--mu", "1", "--rhat", "1", "--L", "1", "--r", "1")
        assert code == 0
        assert float(rows(out)[0]["value"]) == pytest.approx(1 - math.exp(-1), rel=1e-12)

    def test_range_and_json(self, capsys):
        code, out, _ = run(capsys, "pdf", "--alpha", "1.2", "--mu", "0.5", "--rhat", "1", "--L", "3",
                           "--r-min", "0.5", "--r-max", "2", "--points", "4", "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert [d["r"] for d in data] == pytest.approx([0.5, 1.0, 1.5, 2.0])
        assert all(isinstance(d["n_terms"], int) for d in data)

    def test_round_trip_digits(self, capsys):
        _, out, _ = run(capsys, "pdf", "--alpha", "2", "--mu", "1", "--rhat", "1", "--L", "1", "--r", "1")
        value = rows(out)[0]["value"]
        assert float(value) == float(repr(float(value)))
        assert value == "0.7357588823427941"

    def test_tolerance_flag(self, capsys):
        base = ["pdf", "--alpha", "1.2", "--mu", "0.5", "--rhat", "1", "--L", "3", "--r", "2"]
        _, loose, _ = run(capsys, *base, "--tol", "1e-4")
        _, tight, _ = run(capsys, *base, "--tol", "1e-14")
        assert int(rows(loose)[0]["n_terms"]) < int(rows(tight)[0]["n_terms"])

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out.csv"
        code, out, _ = run(capsys, "pdf", "--alpha", "2", "--mu", "1", "--rhat", "1", "--L", "2",
                           "--r", "1", "--output", str(path))
        assert code == 0 and out == ""
        assert path.read_text().startswith("r,value")
        assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# Rayleigh pair\nalpha = 2\nmu = 1\nrhat = 1\nL = 2\nr = 1\n")
        code, out, _ = run(capsys, "pdf", "--config", str(cfg))
        assert code == 0
        _, out2, _ = run(capsys, "pdf", "--config", str(cfg), "--L", "1")
        assert float(rows(out2)[0]["value"]) == pytest.approx(2 * math.exp(-1))
        assert rows(out)[0]["value"] != rows(out2)[0]["value"]

    def test_preset(self, capsys):
        code, out, err = run(capsys, "pdf", "--preset", "fig3")
        assert code == 0
        data = rows(out)
        assert {int(d["L"]) for d in data} == {2, 3, 5, 8}
        assert set(data[0]) >= {"alpha", "mu", "rhat", "L", "r", "value"}


class TestOtherCommands:
    @pytest.mark.parametrize("kind", ["pdf", "cdf"])
    def test_accuracy_table(self, capsys, kind):
        code, out, _ = run(capsys, "accuracy-table", "--kind", kind)
        assert code == 0
        data = rows(out)
        assert len(data) == 6
        for d in data:
            assert float(d["reference_error"]) <= float(d["bound"]) <= 1e-10

    def test_aser(self, capsys):
        code, out, _ = run(capsys, "aser", "--alpha", "2", "--mu", "1", "--rhat", "1", "--L", "1",
                           "--combiner", "mrc", "--snr-db-min", "10", "--snr-db-max", "10", "--asymptotic")
        assert code == 0
        (row,) = rows(out)
        assert float(row["exact"]) == pytest.approx(0.0232687053772038, abs=1e-8)
        assert float(row["diversity_gain"]) == pytest.approx(1.0)
        assert row["asymptotic"] != ""

    def test_modulation_names(self, capsys):
        code, out, _ = run(capsys, "aser", "--alpha", "1.2", "--mu", "0.9", "--rhat", "2", "--L", "3",
                           "--combiner", "mrc", "--G", "0.715", "--snr-db-max", "10")
        assert code == 0
        code, out2, _ = run(capsys, "aser", "--alpha", "1.2", "--mu", "0.9", "--rhat", "2", "--L", "3",
                            "--combiner", "mrc", "--G", "bpsk-min-correlation", "--snr-db-max", "10")
        assert out == out2

    def test_op(self, capsys):
        code, out, _ = run(capsys, "op", "--alpha", "1.2", "--mu", "0.9", "--rhat", "3", "--L", "3",
                           "--gamma-out-db", "10", "--snr-db-min", "20", "--snr-db-max", "40", "--snr-db-step", "10")
        assert code == 0
        vals = [float(d["exact"]) for d in rows(out)]
        assert vals[0] > vals[1] > vals[2] > 0

    def test_op_preset_both_combiners(self, capsys):
        code, out, _ = run(capsys, "op", "--preset", "fig12")
        assert code == 0
        assert {d["combiner"] for d in rows(out)} == {"egc", "mrc"}

    def test_validate(self, capsys):
        code, out, _ = run(capsys, "validate", "--alpha", "1.2", "--mu", "0.5", "--rhat", "1", "--L", "3",
                           "--samples", "20000", "--grid", "2048", "--points", "10", "--seed", "3")
        assert code == 0
        data = rows(out)
        assert [d["pass"] for d in data] == ["true", "true"]
        assert "# spec" in out

    def test_bench(self, capsys):
        code, out, _ = run(capsys, "bench", "--L-list", "2,5", "--points", "5", "--repeat", "1")
        assert code == 0
        data = rows(out)
        assert [int(d["L"]) for d in data] == [2, 5]
        assert float(data[0]["ratio_to_first"]) == 1.0


class TestExitCodes:
    def test_domain(self, capsys):
        code, _, err = run(capsys, "pdf", "--alpha", "-1", "--mu", "1", "--rhat", "1", "--L", "2", "--r", "1")
        assert code == cli.EXIT_DOMAIN
        assert "DomainError" in err

    def test_missing_parameter(self, capsys):
        code, _, err = run(capsys, "pdf", "--alpha", "1", "--r", "1")
        assert code == cli.EXIT_DOMAIN
        assert "--mu" in err

    def test_unknown_preset(self, capsys):
        assert run(capsys, "pdf", "--preset", "fig99")[0] == cli.EXIT_DOMAIN

    def test_wrong_preset_kind(self, capsys):
        assert run(capsys, "pdf", "--preset", "fig7")[0] == cli.EXIT_DOMAIN

    def test_usage_error(self, capsys):
        assert run(capsys, "nonsense")[0] == 2

    def test_unresolvable_point(self, capsys):
        code, _, err = run(capsys, "pdf", "--alpha", "2", "--mu", "2", "--rhat", "1", "--L", "5", "--r", "5")
        assert code == cli.EXIT_NUMERIC
        assert "NumericRangeError" in err

    def test_convergence(self, capsys):
        code, _, err = run(capsys, "pdf", "--alpha", "0.5", "--mu", "0.5", "--rhat", "1", "--L", "5",
                           "--r", "60", "--nt-max", "8")
        assert code == cli.EXIT_NUMERIC

    def test_coarse_grid(self, capsys):
        code, _, _ = run(capsys, "validate", "--grid", "100", "--samples", "2000")
        assert code == cli.EXIT_NUMERIC

    def test_validation_failure(self, capsys, tmp_path):
        # a coarse grid cannot resolve the singular origin of this sum
        path = tmp_path / "report.csv"
        code, _, err = run(capsys, "validate", "--alpha", "0.8", "--mu", "0.2", "--rhat", "5", "--L", "3",
                           "--samples", "5000", "--grid", "1024", "--points", "8", "--output", str(path))
        assert code == cli.EXIT_VALIDATION
        assert "ValidationFailure" in err
        assert "false" in path.read_text()


def test_presets_cover_all_figures():
    assert sorted(FIGURES, key=lambda k: int(k[3:])) == [f"fig{i}" for i in range(1, 13)]


def test_console_module():
    res = subprocess.run([sys.executable, "-m", "alphamu.cli", "pdf", "--alpha", "2", "--mu", "1",
                          "--rhat", "1", "--L", "1", "--r", "1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("1.0,0.7357588823427941")
