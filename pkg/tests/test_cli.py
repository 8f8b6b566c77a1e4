import csv
import subprocess
import sys

import numpy as np
import pytest

from telegraph_power import SweepResult, UsageError, __version__
from telegraph_power.cli import emit_plot_data, read_manifest, run

SMALL = {
    "constant-sweep": ["--points", "12", "--events", "2000"],
    "dde-sweep": ["--betas", "5 20 60", "--horizon", "60", "--burn-in-time", "5"],
    "dist-sweep": ["--family", "lognormal", "--points", "8", "--events", "5000"],
    "cv-sweep": ["--family", "beta", "--cvs", "0.5 4", "--points", "6", "--events", "3000"],
    "bistable": ["--mu", "-5", "-2", "--realizations", "4", "--horizon", "20", "--bins", "20"],
}


def csv_files(path):
    return {p.name: p.read_bytes() for p in sorted(path.glob("*.csv"))}


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_constant_sweep_example(tmp_path):
    out = tmp_path / "c"
    args = ["constant-sweep", "--fmin", "10", "--fmax", "1000", "--points", "30", "--seed", "1"]
    assert run(args + ["--out", str(out)]) == 0
    rows = read_csv(out / "data.csv")
    assert rows[0] == ["f_d", "K_analytic", "K_simulated"]
    assert len(rows) == 31
    fit = {r[0]: r for r in read_csv(out / "fit.csv")[1:]}
    assert float(fit["K_analytic_vs_f_d"][1]) == pytest.approx(-1, abs=0.02)
    plot = np.loadtxt(out / "plot.dat")
    assert plot.shape == (30, 2)
    np.testing.assert_allclose(plot[:, 0], np.log10(np.geomspace(10, 1000, 30)), rtol=1e-12)
    manifest = read_manifest(out / "manifest.txt")
    assert manifest["seed"] == "1"
    assert manifest["tool"] == f"telegraph-power {__version__}"


def test_bistable_example(tmp_path):
    out = tmp_path / "b"
    args = ["bistable", "--mu", "-6", "--horizon", "120", "--realizations", "200", "--seed", "7"]
    assert run(args + ["--out", str(out)]) == 0
    rows = read_csv(out / "data.csv")
    assert rows[0] == ["mu", "f_d", "AST", "median_survival", "escaped_fraction"]
    assert float(rows[1][2]) == 120.0
    dens = np.loadtxt(out / "density_00.dat")
    assert dens.shape == (50, 2)
    assert np.sum(dens[:, 1]) * (dens[1, 0] - dens[0, 0]) == pytest.approx(1.0, abs=1e-12)
    assert read_manifest(out / "manifest.txt")["mu_star"] == "-6"


def test_dde_plot_columns(tmp_path):
    out = tmp_path / "d"
    assert run(["dde-sweep", *SMALL["dde-sweep"], "--out", str(out)]) == 0
    assert read_csv(out / "data.csv")[0] == ["beta", "f_d", "K"]
    plot = np.loadtxt(out / "plot.dat")
    assert plot.shape == (3, 3)
    np.testing.assert_array_equal(plot[:, 0], [5, 20, 60])
    names = [r[0] for r in read_csv(out / "fit.csv")[1:]]
    assert names == ["f_d_vs_beta", "K_vs_f_d", "K_vs_beta"]
    assert "half_power_prefactor" in read_manifest(out / "manifest.txt")


def test_cv_sweep_outputs(tmp_path):
    out = tmp_path / "cv"
    assert run(["cv-sweep", *SMALL["cv-sweep"], "--out", str(out)]) == 0
    slopes = read_csv(out / "slopes.csv")
    assert slopes[0][:2] == ["cv", "slope"]
    # beta cannot reach cv = 4 at mean 1/10
    assert slopes[2][0] == "4" and int(slopes[2][-1]) > 0
    assert np.loadtxt(out / "slopes.dat").shape[1] == 2


@pytest.mark.parametrize("experiment", sorted(SMALL))
def test_reruns_are_byte_identical(tmp_path, experiment):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run([experiment, *SMALL[experiment], "--seed", "3", "--out", str(a)]) == 0
    assert run([experiment, *SMALL[experiment], "--seed", "3", "--out", str(b)]) == 0
    assert csv_files(a) and csv_files(a) == csv_files(b)


@pytest.mark.parametrize("experiment", sorted(SMALL))
def test_manifest_round_trip(tmp_path, experiment):
    first, again = tmp_path / "first", tmp_path / "again"
    assert run(["run", experiment, *SMALL[experiment], "--seed", "4", "--out", str(first)]) == 0
    assert run(["rerun", str(first / "manifest.txt"), "--out", str(again)]) == 0
    assert csv_files(first) == csv_files(again)


def test_rerun_in_place(tmp_path):
    out = tmp_path / "x"
    assert run(["dist-sweep", *SMALL["dist-sweep"], "--out", str(out)]) == 0
    before = csv_files(out)
    (out / "data.csv").unlink()
    assert run(["rerun", str(out / "manifest.txt")]) == 0
    assert csv_files(out) == before


def test_too_few_points_writes_data_without_fit(tmp_path):
    assert run(["dde-sweep", "--betas", "5 20", "--horizon", "30", "--burn-in-time", "5", "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "data.csv")) == 3
    assert read_csv(tmp_path / "fit.csv") == [["name", "slope", "log_intercept", "r_squared", "n_points", "f_min", "f_max"]]


def test_environment_default_and_flag_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("TELEGRAPH_POWER_OUT", str(tmp_path / "env"))
    assert run(["constant-sweep", "--points", "5", "--events", "100"]) == 0
    assert (tmp_path / "env" / "constant-sweep" / "data.csv").exists()
    assert run(["constant-sweep", "--points", "5", "--events", "100", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "data.csv").exists()


@pytest.mark.parametrize(
    "args",
    [
        ["constant-sweep", "--fmin", "-5"],
        ["constant-sweep", "--points", "0"],
        ["dist-sweep", "--events", "0", "--points", "4"],
        ["dist-sweep", "--seed", "-1", "--points", "4", "--events", "10"],
        ["dde-sweep", "--step", "0.3", "--betas", "5"],
        ["bistable", "--mu", "-6", "--horizon", "-1"],
    ],
)
def test_invalid_parameters_exit_2(tmp_path, capsys, args):
    assert run(args + ["--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("telegraph-power: error:")


def test_unknown_experiment_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        run(["nosuch"])
    assert info.value.code == 2


def test_unwritable_output_exits_1(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["constant-sweep", "--points", "5", "--out", str(blocker / "sub")]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_manifest_exits_1(tmp_path, capsys):
    assert run(["rerun", str(tmp_path / "none.txt")]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "telegraph_power", "constant-sweep", "--points", "5",
         "--events", "100", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    bad = subprocess.run([sys.executable, "-m", "telegraph_power", "constant-sweep", "--fmin", "0",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert bad.returncode == 2
    assert bad.stderr.count("\n") == 1


def test_emit_plot_data(tmp_path):
    sweep = SweepResult.from_rows(("f_d", "K_F"), [(10.0, 0.1), (100.0, 0.01), (1000.0, np.nan)])
    path = emit_plot_data(sweep, tmp_path / "p.dat", ("f_d", "K_F"), log10=True)
    np.testing.assert_allclose(np.loadtxt(path), [[1, -1], [2, -2]], atol=1e-15)
    with pytest.raises(UsageError):
        emit_plot_data(SweepResult.from_rows(("a", "b"), []), tmp_path / "q.dat", ("a", "b"))
    with pytest.raises(OSError, match="nope"):
        emit_plot_data(sweep, tmp_path / "nope" / "p.dat", ("f_d", "K_F"))
