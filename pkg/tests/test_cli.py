import csv
import json
import math

import numpy as np
import pytest

from stochamp import __version__
from stochamp.cli import EXIT_ARGS, EXIT_IO, EXIT_OK, curves_rows, main, wigner_rows


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_curves_rows():
    rows = curves_rows([1e-4, 1.0], [0.1, 0.4])
    by = {(r["alpha"], r["r"]): r for r in rows}
    assert by[(1e-4, 0.1)]["g_eff"] == pytest.approx(1.970, abs=1e-3)
    assert by[(1e-4, 0.1)]["g_low_r_limit"] == pytest.approx(2.0, abs=1e-7)
    assert by[(1.0, 0.4)]["F_ideal"] < by[(1.0, 0.4)]["F_eff"]


def test_curves_csv_format(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["curves", "--alpha", "0.1:1.0:4", "--r", "0.1,0.4", "-o", str(out)]) == EXIT_OK
    text = out.read_text()
    header = text.splitlines()[0]
    assert header == "alpha,r,g_eff,F_eff,F_ideal,g_low_r_limit,P_succ"
    first = text.splitlines()[1].split(",")
    assert "e" in first[2] and len(first[2].split("e")[0].replace(".", "").lstrip("-")) >= 10
    assert len(read_csv(out)) == 8


def test_json_format(tmp_path):
    out = tmp_path / "b.json"
    assert main(["branches", "--alpha", "0.5", "--r", "0.4", "--format", "json", "-o", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["meta"]["version"] == __version__
    assert payload["meta"]["alpha"] == 0.5
    assert len(payload["rows"]) == 9


def test_branches_table(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["branches", "--alpha", "0.5", "--r1", "0.4", "--r2", "0.4", "--r3", "0.4", "-o", str(out)]) == EXIT_OK
    rows = read_csv(out)
    row2 = rows[1]
    assert (row2["qnd"], row2["pd1"], row2["pd2"]) == ("1", "0", "0")
    assert float(row2["P"]) == pytest.approx(5.58e-3, rel=5e-3)
    assert float(row2["abs_a"]) == pytest.approx(0.720, abs=1e-3)
    assert float(row2["one_minus_F"]) == pytest.approx(0.362, rel=0.02)
    assert sum(float(r["P"]) for r in rows) == pytest.approx(1.0, abs=1e-12)


def test_branches_low_reflectivity(tmp_path):
    out = tmp_path / "b.csv"
    main(["branches", "--alpha", "0.5", "--r", "0.1", "-o", str(out)])
    rows = read_csv(out)
    assert all(float(r["abs_a"]) == pytest.approx(0.493, abs=1e-3) for r in rows if r["qnd"] == "0")


def test_wigner_grid_peak_and_normalization():
    rows = wigner_rows([0.1], 0.4, 300, 6.0)
    W = np.array([r["W"] for r in rows]).reshape(300, 300)
    h = 12.0 / 299
    assert float(W.sum() * h * h) == pytest.approx(1.0, abs=1e-3)
    i, j = np.unravel_index(np.argmax(W), W.shape)
    from stochamp.amplifier import AmplifierConfig, g_eff_closed_form

    g = g_eff_closed_form(AmplifierConfig.symmetric(0.1, 0.4))
    x_peak = -6.0 + i * h
    p_peak = -6.0 + j * h
    assert abs(x_peak - math.sqrt(2) * g * 0.1) <= h
    assert abs(p_peak) <= h


def test_wigner_grid_rejects_zero_alpha(capsys):
    assert main(["wigner-grid", "--alpha", "0", "--grid", "5"]) == EXIT_ARGS


def test_optimize_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["optimize", "--g-min", "1.4", "--starts", "4", "-o", str(a)]) == EXIT_OK
    assert main(["optimize", "--g-min", "1.4", "--starts", "4", "-o", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    row = read_csv(a)[0]
    assert float(row["P_opt"]) == pytest.approx(1.0e-3, rel=0.1)
    assert float(row["alpha_opt"]) == pytest.approx(0.51, abs=0.02)
    assert float(row["r_opt"]) == pytest.approx(0.38, abs=0.02)
    assert row["converged"] == "true"


def test_sweep_command(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--g-min", "1.5", "--g-max", "1.7", "--step", "0.1", "--starts", "2", "-o", str(out)]) == EXIT_OK
    rows = read_csv(out)
    assert [float(r["g_min"]) for r in rows] == pytest.approx([1.5, 1.6, 1.7])


def test_validate_report(tmp_path):
    out = tmp_path / "v.json"
    assert main(["validate", "--cutoff", "20", "--format", "json", "-o", str(out)]) == EXIT_OK
    rows = {r["check"]: r for r in json.loads(out.read_text())["rows"]}
    assert rows["branch_probability_wigner_vs_fock"]["max_deviation"] < 1e-8
    assert rows["p_succ_closed_form_vs_pipeline"]["max_deviation"] < 1e-12
    printed = rows["f_eff_closed_form_as_printed_vs_overlap"]
    assert printed["status"] == "FAILED" and printed["expected_failure"]
    assert "0.7990" in printed["note"] and "0.9952" in printed["note"]
    assert rows["f_eff_closed_form_vs_overlap"]["status"] == "PASSED"


def test_validation_failure_exit_code(monkeypatch):
    from stochamp import cli

    monkeypatch.setattr(cli, "validation_rows", lambda cutoff: [cli._check("x", 1.0, 1e-8)])
    assert main(["validate"]) == cli.EXIT_VALIDATION


@pytest.mark.parametrize(
    "argv",
    [
        ["branches", "--bogus"],
        ["branches", "--r", "0.4", "--r1", "0.3"],
        ["branches", "--r1", "0.3"],
        ["branches", "--r", "1.2"],
        ["branches", "--alpha=-0.5"],
        ["curves", "--alpha", "0:4:3"],
        ["validate", "--cutoff", "5"],
        ["sweep", "--g-min", "1.5", "--g-max", "1.4"],
        ["optimize", "--g-min", "2.5"],
        ["wigner-grid", "--grid", "1"],
    ],
)
def test_invalid_arguments(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == EXIT_ARGS


def test_unwritable_output():
    assert main(["branches", "-o", "/nonexistent-dir/out.csv"]) == EXIT_IO
