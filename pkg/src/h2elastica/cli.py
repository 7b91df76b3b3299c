"""Command-line entry point: ``h2flow <group> <command> [options]``.

Exit codes: 0 converged / success, 2 time limit, 3 step failure,
4 insufficient data for a diagnostic, 64 usage, 65 bad input data,
66 missing input, 74 other I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .curve import make_curve
from .diagnostics import classify_limit, fit_lojasiewicz, invariance_audit, synthetic_power_law
from .errors import CurveFormatError, H2ElasticaError, InsufficientTailError
from .flow import FlowConfig, Terminal, run_flow, stability_scan
from .io import load_curve, read_json, read_trajectory, save_curve, write_json, write_trajectory

EXIT_OK = 0
EXIT_TIME_LIMIT = 2
EXIT_STEP_FAILURE = 3
EXIT_INSUFFICIENT = 4
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOINPUT = 66
EXIT_IOERR = 74

TERMINAL_EXIT = {
    Terminal.CONVERGED: EXIT_OK,
    Terminal.TIME_LIMIT: EXIT_TIME_LIMIT,
    Terminal.STEP_FAILURE: EXIT_STEP_FAILURE,
}

OUT_ENV = "H2FLOW_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with TimeLimit.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_root():
    return Path(os.environ.get(OUT_ENV, "runs"))


# -- curve ----------------------------------------------------------------------------------


def cmd_curve_make(args):
    params = {}
    if args.shape == "circle":
        params.update(r=args.r, p=args.p)
    elif args.shape == "ellipse":
        params.update(a=args.a, b=args.b)
    elif args.shape == "figure_eight":
        params.update(scale=args.scale)
    else:
        params.update(seed=args.seed, decay=args.decay)
    curve = make_curve(args.shape, args.n, args.dim, **params)
    out = Path(args.out) if args.out else _out_root() / f"{args.shape}.curve.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_curve(out, curve)
    print(out)
    return EXIT_OK


# -- flow -----------------------------------------------------------------------------------

_FLAG_KEYS = {
    "lam": "lam", "backend": "backend", "integrator": "integrator", "dt": "dt",
    "rel_tol": "rel_tol", "abs_tol": "abs_tol", "dt_min": "dt_min", "dt_max": "dt_max",
    "grad_tol": "stop_grad_tol", "t_max": "t_max", "stride": "snapshot_stride",
    "max_steps": "max_steps",
}


def effective_config(args):
    """Flags override config-file keys, which override the dataclass defaults."""
    merged = {}
    if args.config:
        merged.update(read_json(args.config))
    for flag, key in _FLAG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            merged[key] = val
    try:
        return FlowConfig.from_dict(merged)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_flow_run(args):
    config = effective_config(args)
    curve = load_curve(args.input)
    out = Path(args.out_dir) if args.out_dir else _out_root() / Path(args.input).name.split(".")[0]
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    traj = run_flow(curve, config)
    elapsed = time.perf_counter() - t0
    write_trajectory(out / "trajectory.jsonl", traj)
    save_curve(out / "final.curve.json", traj.final)
    last = traj.records[-1]
    manifest = {
        "version": __version__,
        "command": ["h2flow", *sys.argv[1:]] if args.record_argv else None,
        "config": config.to_dict(),
        "input": str(args.input),
        "outputs": {"trajectory": "trajectory.jsonl", "final_curve": "final.curve.json"},
        "started": started.isoformat(),
        "wall_seconds": elapsed,
        "steps": traj.n_steps,
        "rejected": traj.rejected,
        "status": traj.terminal.value,
        "message": traj.message,
        "final": {"t": last.t, "energy": last.energy, "grad_norm": last.grad_norm, "cum_length": last.cum_length},
    }
    write_json(out / "manifest.json", manifest)
    print(f"{traj.terminal.value}: t={last.t:.6g} E={last.energy:.12g} |grad|={last.grad_norm:.3e} -> {out}")
    return TERMINAL_EXIT[traj.terminal]


def cmd_flow_compare(args):
    curve = load_curve(args.input)
    rows = []
    if args.h2_dt:
        rows += stability_scan(curve, args.lam, args.h2_dt, budget=args.budget, methods=("h2",), backend=args.backend)
    if args.l2_dt:
        rows += stability_scan(curve, args.lam, args.l2_dt, budget=args.budget, methods=("l2",))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["method", "N", "dt", "survived", "final_energy"])
        for r in rows:
            w.writerow([r.method, r.n_samples, f"{r.dt:.6g}", r.survived, f"{r.final_energy:.12g}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# -- diagnostics ------------------------------------------------------------------------------


def _emit(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_diag_lojasiewicz(args):
    if args.synthetic is not None:
        t, E, g = synthetic_power_law(args.synthetic)
    else:
        src = Path(args.run)
        traj = read_trajectory(src / "trajectory.jsonl" if src.is_dir() else src)
        t, E, g = traj.times, traj.energies, traj.grad_norms
    try:
        fit = fit_lojasiewicz(t, E, g)
    except InsufficientTailError as exc:
        print(f"warning: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    _emit(fit.to_dict(), args.out)
    return EXIT_OK


def cmd_diag_classify(args):
    report = classify_limit(load_curve(args.input), args.lam)
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def cmd_diag_invariance(args):
    seed = args.diffeo_seed if args.diffeo_seed is not None else args.seed
    report = invariance_audit(load_curve(args.input), args.lam, diffeo_seed=seed, translation=args.translate)
    _emit(report.to_dict(), args.out)
    return EXIT_OK


# -- plot data --------------------------------------------------------------------------------


def cmd_plot_emit(args):
    run = Path(args.run)
    traj = read_trajectory(run / "trajectory.jsonl")
    out = Path(args.out_dir) if args.out_dir else run
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "series.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "energy", "grad_norm", "cum_length"])
        for r in traj.records:
            w.writerow([repr(r.t), repr(r.energy), repr(r.grad_norm), repr(r.cum_length)])
    with open(out / "snapshots.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snapshot", "t", "index", *[f"x{i}" for i in range(traj.final.dim)]])
        for k, (t, c) in enumerate(traj.snapshots):
            for j, p in enumerate(c.points):
                w.writerow([k, repr(t), j, *map(repr, p)])
    if not args.no_svg:
        _plot_svg(traj, out)
    print(out)
    return EXIT_OK


def _plot_svg(traj, out):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4.5))
    curves = [c for _, c in traj.snapshots] + [traj.final]
    shade = np.linspace(0.85, 0.0, len(curves))
    for c, s in zip(curves, shade):
        p = np.vstack([c.points, c.points[:1]])
        ax0.plot(p[:, 0], p[:, 1], color=str(s), lw=1.0)
    ax0.set_aspect("equal")
    ax0.set_title("snapshots")
    E = traj.energies
    gap = E - E[-1]
    keep = gap > 0
    ax1.semilogy(traj.times[keep], gap[keep], label="E - E_final")
    ax1.semilogy(traj.times, traj.grad_norms, label="|grad|")
    ax1.set_xlabel("t")
    ax1.legend()
    fig.tight_layout()
    fig.savefig(out / "snapshots.svg", format="svg")
    plt.close(fig)


# -- parser -----------------------------------------------------------------------------------


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser():
    p = _Parser(prog="h2flow", description="H^2(ds) gradient flow of the elastic energy for closed curves.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--seed", type=int, default=0, help="default seed for random fixtures and audits")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    curve = groups.add_parser("curve").add_subparsers(dest="command", required=True, parser_class=_Parser)
    mk = curve.add_parser("make", help="write a fixture curve document")
    mk.add_argument("--shape", required=True, choices=["circle", "ellipse", "figure_eight", "fourier"])
    mk.add_argument("--n", type=int, default=128)
    mk.add_argument("--dim", type=int, default=2)
    mk.add_argument("--r", type=float, default=1.0)
    mk.add_argument("--p", type=int, default=1)
    mk.add_argument("--a", type=float, default=1.3)
    mk.add_argument("--b", type=float, default=0.7)
    mk.add_argument("--scale", type=float, default=1.0)
    mk.add_argument("--decay", type=float, default=1.0)
    mk.add_argument("--out")
    mk.set_defaults(func=cmd_curve_make)

    flow = groups.add_parser("flow").add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = flow.add_parser("run", help="integrate the H^2(ds) flow")
    run.add_argument("--in", dest="input", required=True)
    run.add_argument("--config", help="JSON file with FlowConfig keys")
    run.add_argument("--lambda", dest="lam", type=float)
    run.add_argument("--backend", choices=["weak", "kernel"])
    run.add_argument("--integrator", choices=["adaptive", "rk4"])
    run.add_argument("--dt", type=float)
    run.add_argument("--rel-tol", type=float)
    run.add_argument("--abs-tol", type=float)
    run.add_argument("--dt-min", type=float)
    run.add_argument("--dt-max", type=float)
    run.add_argument("--grad-tol", type=float)
    run.add_argument("--t-max", type=float)
    run.add_argument("--stride", type=int)
    run.add_argument("--max-steps", type=int)
    run.add_argument("--out-dir")
    run.add_argument("--no-record-argv", dest="record_argv", action="store_false")
    run.set_defaults(func=cmd_flow_run)

    cmp_ = flow.add_parser("compare", help="stability table for the H^2(ds) and L^2(ds) flows")
    cmp_.add_argument("--in", dest="input", required=True)
    cmp_.add_argument("--lambda", dest="lam", type=float, default=1.0)
    cmp_.add_argument("--backend", choices=["weak", "kernel"], default="weak")
    cmp_.add_argument("--h2-dt", type=_float_list, default=[0.1])
    cmp_.add_argument("--l2-dt", type=_float_list, default=[1e-7, 1e-2])
    cmp_.add_argument("--budget", type=int, default=100)
    cmp_.add_argument("--out")
    cmp_.set_defaults(func=cmd_flow_compare)

    diag = groups.add_parser("diag").add_subparsers(dest="command", required=True, parser_class=_Parser)
    lj = diag.add_parser("lojasiewicz", help="fit the Lojasiewicz exponent on a trajectory tail")
    src = lj.add_mutually_exclusive_group(required=True)
    src.add_argument("--run", help="run directory or trajectory file")
    src.add_argument("--synthetic", type=float, metavar="THETA", help="exact power-law trajectory")
    lj.add_argument("--out")
    lj.set_defaults(func=cmd_diag_lojasiewicz)
    cl = diag.add_parser("classify", help="classify a limit curve")
    cl.add_argument("--in", dest="input", required=True)
    cl.add_argument("--lambda", dest="lam", type=float, default=1.0)
    cl.add_argument("--out")
    cl.set_defaults(func=cmd_diag_classify)
    inv = diag.add_parser("invariance", help="reparametrisation and translation audit")
    inv.add_argument("--in", dest="input", required=True)
    inv.add_argument("--lambda", dest="lam", type=float, default=1.0)
    inv.add_argument("--diffeo-seed", type=int)
    inv.add_argument("--translate", type=float, nargs="+")
    inv.add_argument("--out")
    inv.set_defaults(func=cmd_diag_invariance)

    plot = groups.add_parser("plot").add_subparsers(dest="command", required=True, parser_class=_Parser)
    em = plot.add_parser("emit", help="CSV series and an SVG of snapshots for a run directory")
    em.add_argument("--run", required=True)
    em.add_argument("--out-dir")
    em.add_argument("--no-svg", action="store_true")
    em.set_defaults(func=cmd_plot_emit)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"h2flow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"h2flow: error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except (CurveFormatError, json.JSONDecodeError) as exc:
        print(f"h2flow: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (H2ElasticaError, ValueError) as exc:
        print(f"h2flow: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"h2flow: error: {exc}", file=sys.stderr)
        return EXIT_IOERR


if __name__ == "__main__":
    sys.exit(main())
