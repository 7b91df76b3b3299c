"""Flow the (1.3, 0.7) ellipse at lambda = 1 to a stationary circle and report the limit."""

import argparse
import time

from h2elastica.curve import make_curve
from h2elastica.diagnostics import classify_limit, fit_lojasiewicz
from h2elastica.errors import InsufficientTailError
from h2elastica.flow import FlowConfig, run_flow


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--backend", choices=["weak", "kernel"], default="weak")
    ap.add_argument("--grad-tol", type=float, default=1e-6)
    args = ap.parse_args()

    curve = make_curve("ellipse", args.n, a=1.3, b=0.7)
    cfg = FlowConfig(lam=args.lam, backend=args.backend, stop_grad_tol=args.grad_tol)
    t0 = time.perf_counter()
    traj = run_flow(curve, cfg)
    wall = time.perf_counter() - t0

    print(f"{traj.terminal.value} at t={traj.times[-1]:.3f} after {traj.n_steps} steps "
          f"({traj.rejected} rejected, {wall:.2f}s)")
    print(f"E: {traj.energies[0]:.6f} -> {traj.energies[-1]:.12f}")
    rep = classify_limit(traj.final, cfg.params)
    print(f"limit: {rep.classification}, radius {rep.radius}, std/mean k "
          f"{rep.curvature_std / rep.curvature_mean:.2e}, EL residual {rep.stationarity_norm:.2e}")
    print(f"cumulative H2(ds) length {traj.records[-1].cum_length:.6f}")
    try:
        fit = fit_lojasiewicz(traj)
        print(f"theta {fit.theta:.3f}, Z {fit.Z:.3f}, residual {fit.residual:.3f} over {fit.n_points} records")
    except InsufficientTailError as exc:
        print(f"no exponent fit: {exc}")


if __name__ == "__main__":
    main()
