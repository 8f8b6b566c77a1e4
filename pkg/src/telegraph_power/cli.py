"""Experiment harness: one subcommand per experiment family.

Every run writes ``data.csv``, ``fit.csv`` (where a power law is fitted),
whitespace-delimited ``*.dat`` plot files and a ``manifest.txt`` whose
``command`` line reproduces the run via ``telegraph-power rerun``.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_CVS,
    DISTRIBUTION_SWEEPS,
    cv_slope_table,
    cv_sweep,
    dde_scaling,
    distribution_sweep,
    fit_power_law,
    fit_sweep,
)
from .bistable import DoubleWellConfig, default_mus, mu_sweep
from .dde import DdeConfig, beta_sweep, default_betas
from .exceptions import ConfigurationError, InfeasibleError, ParameterError, TelegraphError, UsageError
from .sweep import SweepResult, format_number
from .telegraph import constant_d_sweep

OUT_ENV = "TELEGRAPH_POWER_OUT"
EXPERIMENTS = ("constant-sweep", "dde-sweep", "dist-sweep", "cv-sweep", "bistable")
FIT_COLUMNS = ("name", "slope", "log_intercept", "r_squared", "n_points", "f_min", "f_max")


def emit_plot_data(sweep, path, columns, log10=False):
    """Write selected sweep columns as headerless whitespace-delimited text.

    With ``log10=True`` every column is written as its base-10 logarithm.
    Rows containing NaN are skipped.
    """
    if len(sweep) == 0:
        raise UsageError("cannot emit plot data for an empty sweep")
    data = np.column_stack([sweep[c] for c in columns])
    data = data[np.all(np.isfinite(data), axis=1)]
    if log10:
        data = np.log10(data)
    try:
        with open(path, "w") as fh:
            for row in data:
                fh.write(" ".join(format_number(x) for x in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc.strerror}") from exc
    return Path(path)


def _log_grid(low, high, n, name):
    if not 0 < low < high:
        raise ParameterError(name, f"need 0 < min < max, got {low!r}, {high!r}")
    if n < 1:
        raise ParameterError("points", f"must be >= 1, got {n!r}")
    return np.geomspace(low, high, n)


def _fit_row(name, fit):
    return [name, format_number(fit.slope), format_number(fit.log_intercept),
            format_number(fit.r_squared), str(fit.n_points),
            format_number(fit.f_range[0]), format_number(fit.f_range[1])]


def _try_fit(fit_fn, *args, **kwargs):
    """Fit, or ``None`` when too few points fall in the fit window."""
    try:
        return fit_fn(*args, **kwargs)
    except UsageError:
        return None


def _write_fits(path, named_fits):
    """Header plus one row per available fit; missing fits are left out."""
    with open(path, "w") as fh:
        fh.write(",".join(FIT_COLUMNS) + "\n")
        for name, fit in named_fits:
            if fit is not None:
                fh.write(",".join(_fit_row(name, fit)) + "\n")


def _write_manifest(path, args, argv, extra=()):
    lines = [
        f"tool = telegraph-power {__version__}",
        f"command = {shlex.join(argv)}",
        f"experiment = {args.experiment}",
        f"seed = {args.seed}",
    ]
    for key in sorted(vars(args)):
        if key in ("experiment", "seed", "func", "out"):
            continue
        lines.append(f"{key} = {getattr(args, key)}")
    lines.extend(f"{k} = {v}" for k, v in extra)
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path):
    """Parse ``key = value`` lines of a manifest into a dict."""
    out = {}
    for line in Path(path).read_text().splitlines():
        key, sep, value = line.partition(" = ")
        if sep:
            out[key.strip()] = value
    return out


def _run_constant(args, out):
    freqs = _log_grid(args.fmin, args.fmax, args.points, "frequencies")
    sweep = constant_d_sweep(freqs, n_events=args.events, burn_in_fraction=args.burn_in)
    sweep.to_csv(out / "data.csv")
    fits = [
        ("K_analytic_vs_f_d", _try_fit(fit_sweep, sweep, "f_d", "K_analytic", args.min_frequency)),
        ("K_simulated_vs_f_d", _try_fit(fit_sweep, sweep, "f_d", "K_simulated", args.min_frequency)),
    ]
    _write_fits(out / "fit.csv", fits)
    emit_plot_data(sweep, out / "plot.dat", ("f_d", "K_analytic"), log10=True)
    return ()


def _run_dde(args, out):
    if args.betas:
        betas = np.asarray(args.betas)
    else:
        _log_grid(args.beta_min, args.beta_max, args.points, "beta")
        betas = default_betas(args.points, args.beta_min, args.beta_max)
    template = DdeConfig(beta=1.0, step=args.step, horizon=args.horizon,
                         history=args.history, burn_in_time=args.burn_in_time)
    sweep = beta_sweep(betas, template, n_jobs=args.jobs)
    sweep.to_csv(out / "data.csv")
    sc = _try_fit(dde_scaling, sweep)
    _write_fits(out / "fit.csv", [] if sc is None else [
        ("f_d_vs_beta", sc.frequency_vs_beta),
        ("K_vs_f_d", sc.bound_vs_frequency),
        ("K_vs_beta", sc.bound_vs_beta),
    ])
    emit_plot_data(sweep, out / "plot.dat", ("beta", "f_d", "K"))
    if sc is None:
        return ()
    return (("half_power_prefactor", format_number(sc.half_power_prefactor)),)


def _run_dist(args, out):
    sweep = distribution_sweep(args.family, n_events=args.events, seed=args.seed,
                               n_points=args.points, burn_in_fraction=args.burn_in, n_jobs=args.jobs)
    sweep.to_csv(out / "data.csv")
    fit = _try_fit(fit_sweep, sweep, min_frequency=args.min_frequency)
    _write_fits(out / "fit.csv", [("K_F_vs_f_d", fit)])
    emit_plot_data(sweep, out / "plot.dat", ("f_d", "K_F"), log10=True)
    return () if fit is None else (("r_squared_flagged", str(fit.flagged)),)


def _run_cv(args, out):
    freqs = _log_grid(args.fmin, args.fmax, args.points, "frequencies")
    fits = cv_sweep(args.family, args.cvs, freqs, n_events=args.events, seed=args.seed,
                    burn_in_fraction=args.burn_in, min_frequency=args.min_frequency, n_jobs=args.jobs)
    rows = []
    for c in fits:
        for r in c.sweep.data:
            rows.append((c.cv, *r))
    data = SweepResult.from_rows(("cv", "f_target", "f_d", "K_F"), rows)
    data.to_csv(out / "data.csv")
    table = cv_slope_table(args.family, fits)
    table.to_csv(out / "slopes.csv")
    with open(out / "fit.csv", "w") as fh:
        fh.write(",".join(FIT_COLUMNS + ("n_infeasible",)) + "\n")
        for c in fits:
            if c.fit is not None:
                fh.write(",".join(_fit_row(f"cv={format_number(c.cv)}", c.fit) + [str(len(c.infeasible))]) + "\n")
    emit_plot_data(data, out / "plot.dat", ("cv", "f_d", "K_F"))
    emit_plot_data(table, out / "slopes.dat", ("cv", "slope"))
    return ()


def _run_bistable(args, out):
    mus = np.asarray(args.mu) if args.mu else default_mus(args.points, args.mu_min, args.mu_max)
    template = DoubleWellConfig(mu=float(mus[0]), sigma=args.sigma, horizon=args.horizon, step=args.step,
                                n_realizations=args.realizations, seed=args.seed)
    sweep = mu_sweep(mus, template, n_jobs=args.jobs, bins=args.bins)
    sweep.to_csv(out / "data.csv")
    dens_rows = []
    for i, (mu, dens) in enumerate(sorted(sweep.metadata["densities"].items())):
        dens_rows.extend((mu, x, p) for x, p in zip(dens.centers, dens.density))
        d = SweepResult.from_rows(("x_bin_center", "density"), zip(dens.centers, dens.density))
        emit_plot_data(d, out / f"density_{i:02d}.dat", ("x_bin_center", "density"))
    SweepResult.from_rows(("mu", "x_bin_center", "density"), dens_rows).to_csv(out / "density.csv")
    emit_plot_data(sweep, out / "plot.dat", ("mu", "AST"))
    _write_fits(out / "fit.csv", [("AST_vs_f_d", _try_fit(fit_power_law, sweep["f_d"], sweep["AST"]))])
    return (("mu_star", format_number(sweep.metadata["mu_star"])),)


def _float_list(text):
    return [float(x) for x in text.replace(",", " ").split()]


def build_parser():
    parser = argparse.ArgumentParser(prog="telegraph-power", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", type=Path, default=None,
                       help=f"output directory (default ${OUT_ENV}/<experiment> or results/<experiment>)")
        p.add_argument("--jobs", type=int, default=1, help="worker threads")

    p = sub.add_parser("constant-sweep", help="K_F against f_d for constant intervals")
    common(p)
    p.add_argument("--fmin", type=float, default=10.0)
    p.add_argument("--fmax", type=float, default=1000.0)
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--events", type=int, default=10**5)
    p.add_argument("--burn-in", type=float, default=0.5)
    p.add_argument("--min-frequency", type=float, default=10.0)

    p = sub.add_parser("dde-sweep", help="sign-change frequency and bound of the delay equation")
    common(p)
    p.add_argument("--beta-min", type=float, default=3.0)
    p.add_argument("--beta-max", type=float, default=200.0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--betas", type=_float_list, default=None, help="explicit beta list, overrides the grid")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=1e4)
    p.add_argument("--burn-in-time", type=float, default=1e3)
    p.add_argument("--history", type=float, default=0.1, help="constant initial function")

    p = sub.add_parser("dist-sweep", help="K_F against f_d for one interval law")
    common(p)
    p.add_argument("--family", choices=[f.value for f in DISTRIBUTION_SWEEPS], default="exponential")
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--events", type=int, default=10**6)
    p.add_argument("--burn-in", type=float, default=0.5)
    p.add_argument("--min-frequency", type=float, default=10.0)

    p = sub.add_parser("cv-sweep", help="power-law slope against interval CV")
    common(p)
    p.add_argument("--family", choices=["gamma", "beta", "lognormal"], default="gamma")
    p.add_argument("--cvs", type=_float_list, default=list(DEFAULT_CVS))
    p.add_argument("--fmin", type=float, default=10.0)
    p.add_argument("--fmax", type=float, default=1000.0)
    p.add_argument("--points", type=int, default=30)
    p.add_argument("--events", type=int, default=10**6)
    p.add_argument("--burn-in", type=float, default=0.5)
    p.add_argument("--min-frequency", type=float, default=10.0)

    p = sub.add_parser("bistable", help="double-well survival times and densities")
    common(p)
    p.add_argument("--mu", type=float, nargs="+", default=None, help="explicit mu values")
    p.add_argument("--mu-min", type=float, default=-6.0)
    p.add_argument("--mu-max", type=float, default=-0.5)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=120.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--realizations", type=int, default=200)
    p.add_argument("--bins", type=int, default=50)

    p = sub.add_parser("rerun", help="repeat the run recorded in a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, default=None, help="write to this directory instead")
    return parser


RUNNERS = {
    "constant-sweep": _run_constant,
    "dde-sweep": _run_dde,
    "dist-sweep": _run_dist,
    "cv-sweep": _run_cv,
    "bistable": _run_bistable,
}


def _output_dir(args):
    if args.out is not None:
        return Path(args.out)
    base = os.environ.get(OUT_ENV) or "results"
    return Path(base) / args.experiment


def run(argv):
    """Parse ``argv`` and run one experiment. Returns the process exit status."""
    argv = list(argv)
    if argv and argv[0] == "run":
        argv = argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.experiment == "rerun":
        try:
            command = read_manifest(args.manifest)["command"]
        except (OSError, KeyError) as exc:
            print(f"telegraph-power: error: cannot read manifest {args.manifest}: {exc}", file=sys.stderr)
            return 1
        again = [a for a in shlex.split(command) if a]
        if args.out is not None:
            again += ["--out", str(args.out)]
        return run(again)

    out = _output_dir(args)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"output directory {out} is not writable")
        extra = RUNNERS[args.experiment](args, out)
        clean = [a for a in argv]
        if "--out" not in clean:
            clean += ["--out", str(out)]
        _write_manifest(out / "manifest.txt", args, clean, extra)
    except (ParameterError, InfeasibleError, ConfigurationError, UsageError) as exc:
        print(f"telegraph-power: error: {exc}", file=sys.stderr)
        return 2
    except (TelegraphError, OSError) as exc:
        print(f"telegraph-power: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
