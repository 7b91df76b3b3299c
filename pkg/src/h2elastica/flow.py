"""Time integration of ``gamma_t = -grad E`` in the H^2(ds) metric, plus the
explicit L^2(ds) elastic flow used as a stiffness baseline.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .curve import ClosedCurve, h2ds_norm, l2ds_norm
from .energy import EnergyParams, energy, l2_gradient
from .errors import FactorizationError, NonImmersedError, StepFailure
from .kernel import h2_gradient_kernel
from .weaksolve import h2_gradient_weak

ENERGY_SLACK = 1e-10

BACKENDS = ("weak", "kernel")
INTEGRATORS = ("adaptive", "rk4")


class Terminal(str, Enum):
    CONVERGED = "Converged"
    TIME_LIMIT = "TimeLimit"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class FlowConfig:
    """Settings for one H^2(ds) gradient-flow run.

    ``dt`` is the fixed step for ``rk4`` and the initial trial step for
    ``adaptive`` (Dormand-Prince 5(4) with error control).
    """

    lam: float = 1.0
    backend: str = "weak"
    integrator: str = "adaptive"
    dt: float = 0.05
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    dt_min: float = 1e-10
    dt_max: float = 2.0
    stop_grad_tol: float = 1e-6
    t_max: float = 200.0
    snapshot_stride: int = 10
    max_steps: int = 200_000

    def __post_init__(self):
        EnergyParams(self.lam)
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        for name in ("dt", "rel_tol", "abs_tol", "dt_min", "dt_max", "stop_grad_tol", "t_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.dt_min < self.dt_max:
            raise ValueError("dt_min must be smaller than dt_max")
        if self.snapshot_stride < 1 or self.max_steps < 1:
            raise ValueError("snapshot_stride and max_steps must be >= 1")

    @property
    def params(self):
        return EnergyParams(self.lam)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class FlowRecord:
    t: float
    energy: float
    grad_norm: float
    dt: float
    cum_length: float


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    terminal: Terminal | None = None
    final: ClosedCurve | None = None
    message: str = ""
    failed_dt: float | None = None
    rejected: int = 0

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    @property
    def times(self):
        return self.column("t")

    @property
    def energies(self):
        return self.column("energy")

    @property
    def grad_norms(self):
        return self.column("grad_norm")

    @property
    def n_steps(self):
        return max(len(self.records) - 1, 0)

    def dissipated(self):
        """Trapezoid estimate of ``int |grad|^2 dt`` over the recorded steps."""
        t, g = self.times, self.grad_norms
        return float(np.sum(0.5 * np.diff(t) * (g[1:] ** 2 + g[:-1] ** 2)))


def gradient(curve, params, backend="weak"):
    if backend == "weak":
        return h2_gradient_weak(curve, params)
    if backend == "kernel":
        return h2_gradient_kernel(curve, params)
    raise ValueError(f"unknown backend {backend!r}")


def _velocity(params, backend):
    def f(points):
        return -gradient(ClosedCurve(points), params, backend)

    return f


# Dormand-Prince 5(4): c, a, b (5th order), e = b - b_hat.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dopri(f, y, k1, dt, rel_tol, abs_tol):
    """One Dormand-Prince step; returns (y_new, f(y_new), scaled error).

    The last stage sits at ``y_new`` itself, so its slope is reused (FSAL).
    """
    ks = [k1]
    for i in range(1, 7):
        yi = y + dt * sum(a * k for a, k in zip(_A[i], ks) if a)
        ks.append(f(yi))
    y_new = y + dt * sum(b * k for b, k in zip(_B, ks) if b)
    err = dt * sum(e * k for e, k in zip(_E, ks) if e)
    scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return y_new, ks[6], float(np.sqrt(np.mean((err / scale) ** 2)))


def _rk4(f, y, dt, k1=None):
    k1 = f(y) if k1 is None else k1
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step(curve, config, dt):
    """One explicit step of the H^2(ds) flow.

    Returns ``(new_curve, error_estimate)``; the estimate is the scaled
    embedded error for ``adaptive`` and ``None`` for ``rk4``.  Raises
    :class:`NonImmersedError` if any stage leaves the immersed curves.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return curve, 0.0
    f = _velocity(config.params, config.backend)
    y = curve.points
    if config.integrator == "rk4":
        return ClosedCurve(_rk4(f, y, dt)), None
    y_new, _, err = _dopri(f, y, f(y), dt, config.rel_tol, config.abs_tol)
    return ClosedCurve(y_new), err


def run_flow(curve, config, callback=None):
    """Integrate until ``|grad| < stop_grad_tol``, ``t >= t_max`` or a step fails.

    Every accepted step is recorded; snapshots are taken before every
    ``snapshot_stride``-th step.  A failure never raises: the partial
    trajectory comes back with terminal ``StepFailure``.
    """
    params = config.params
    backend = config.backend
    traj = Trajectory()

    def grad_and_norm(c):
        g = gradient(c, params, backend)
        return g, h2ds_norm(c, g)

    try:
        g, gnorm = grad_and_norm(curve)
    except (NonImmersedError, FactorizationError) as exc:
        traj.terminal, traj.final, traj.message = Terminal.STEP_FAILURE, curve, str(exc)
        return traj
    t, E, cum = 0.0, energy(curve, params), 0.0
    traj.records.append(FlowRecord(t, E, gnorm, 0.0, 0.0))
    f = _velocity(params, backend)
    dt = config.dt if config.integrator == "rk4" else min(config.dt, config.dt_max)
    k1 = -g
    accepted = 0

    def finish(status, msg=""):
        traj.terminal, traj.final, traj.message = status, curve, msg
        return traj

    while True:
        if gnorm < config.stop_grad_tol:
            return finish(Terminal.CONVERGED)
        if t >= config.t_max * (1 - 1e-14) or accepted >= config.max_steps:
            return finish(Terminal.TIME_LIMIT)
        if accepted % config.snapshot_stride == 0 and len(traj.snapshots) * config.snapshot_stride <= accepted:
            traj.snapshots.append((t, curve))
        h = min(dt, config.t_max - t)
        try:
            if config.integrator == "rk4":
                new = ClosedCurve(_rk4(f, curve.points, h, k1))
                g_new, gnorm_new = grad_and_norm(new)
                err = 0.0
            else:
                y_new, fsal, err = _dopri(f, curve.points, k1, h, config.rel_tol, config.abs_tol)
                new = ClosedCurve(y_new)
                g_new = -fsal
                gnorm_new = h2ds_norm(new, g_new)
            E_new = energy(new, params)
            ok = err <= 1.0 and E_new <= E + ENERGY_SLACK
            why = "energy increase" if err <= 1.0 else "error estimate"
        except (NonImmersedError, FactorizationError, ValueError) as exc:
            ok, err, why = False, math.inf, str(exc)
        if not ok:
            traj.rejected += 1
            if config.integrator == "rk4":
                traj.failed_dt = h
                return finish(Terminal.STEP_FAILURE, f"step rejected at t={t:.6g}, dt={h:.3g}: {why}")
            shrink = 0.25 if not math.isfinite(err) or err <= 1.0 else max(0.2, 0.9 * err**-0.2)
            dt = h * shrink
            if dt < config.dt_min:
                traj.failed_dt = dt
                return finish(Terminal.STEP_FAILURE, f"dt underflow at t={t:.6g} ({why})")
            continue
        cum += 0.5 * h * (gnorm + gnorm_new)
        t += h
        curve, g, gnorm, E, k1 = new, g_new, gnorm_new, E_new, -g_new
        accepted += 1
        traj.records.append(FlowRecord(t, E, gnorm, h, cum))
        if callback is not None:
            callback(traj.records[-1])
        if config.integrator == "adaptive":
            grow = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err**-0.2))
            dt = min(h * grow, config.dt_max)


def run_l2_flow(curve, params, dt, t_max=math.inf, max_steps=None, snapshot_stride=0):
    """Explicit RK4 for the fourth-order flow ``gamma_t = -grad_{L^2(ds)} E``.

    Blow-up (energy increase beyond the slack, non-finite values, loss of
    immersion) ends the run with terminal ``StepFailure`` and ``failed_dt``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if max_steps is None and not math.isfinite(t_max):
        raise ValueError("need a finite t_max or a step budget")

    def f(points):
        return -l2_gradient(ClosedCurve(points), params)

    traj = Trajectory()
    t, E = 0.0, energy(curve, params)
    traj.records.append(FlowRecord(t, E, _l2_norm(curve, params), 0.0, 0.0))
    cum, n = 0.0, 0
    while t < t_max * (1 - 1e-14) and (max_steps is None or n < max_steps):
        if snapshot_stride and n % snapshot_stride == 0:
            traj.snapshots.append((t, curve))
        h = min(dt, t_max - t)
        try:
            new = ClosedCurve(_rk4(f, curve.points, h))
            E_new = energy(new, params)
            gn = _l2_norm(new, params)
            bad = not (np.isfinite(E_new) and np.isfinite(gn)) or E_new > E + ENERGY_SLACK
            why = "energy increase"
        except (NonImmersedError, ValueError, FloatingPointError) as exc:
            bad, why = True, str(exc)
        if bad:
            traj.terminal, traj.final, traj.failed_dt = Terminal.STEP_FAILURE, curve, dt
            traj.message = f"blow-up after {n} steps at dt={dt:.3g}: {why}"
            return traj
        cum += h * gn
        t += h
        n += 1
        curve, E = new, E_new
        traj.records.append(FlowRecord(t, E, gn, h, cum))
    traj.terminal, traj.final = Terminal.TIME_LIMIT, curve
    return traj


def _l2_norm(curve, params):
    return l2ds_norm(curve, l2_gradient(curve, params))


@dataclass(frozen=True)
class ScanRow:
    method: str
    n_samples: int
    dt: float
    survived: int
    budget: int
    final_energy: float

    @property
    def stable(self):
        return self.survived >= self.budget


def survive(curve, params, method, dt, budget, backend="weak"):
    """Steps completed (at most ``budget``) and the last energy, for a fixed-step run."""
    with np.errstate(all="ignore"):
        if method == "l2":
            traj = run_l2_flow(curve, params, dt, max_steps=budget)
        elif method == "h2":
            p = params if isinstance(params, EnergyParams) else EnergyParams(float(params))
            cfg = FlowConfig(
                lam=p.lam, backend=backend, integrator="rk4", dt=dt,
                stop_grad_tol=1e-300, t_max=dt * budget * 2, max_steps=budget,
                snapshot_stride=budget + 1,
            )
            traj = run_flow(curve, cfg)
        else:
            raise ValueError(f"unknown method {method!r}")
    return traj.n_steps, float(traj.records[-1].energy)


def stability_scan(curve, params, dt_grid, budget=200, methods=("h2", "l2"), backend="weak"):
    """Run each method for a fixed step budget at every ``dt``; failures are data."""
    rows = []
    for method in methods:
        for dt in dt_grid:
            n, e = survive(curve, params, method, dt, budget, backend)
            rows.append(ScanRow(method, curve.n_samples, float(dt), n, budget, e))
    return rows


def max_stable_dt(curve, params, method="l2", lo=1e-12, hi=1.0, budget=200, iters=20, backend="weak"):
    """Bisection (in log dt) for the largest step surviving ``budget`` steps.

    ``lo`` must survive and ``hi`` must fail; returns the last surviving dt.
    """
    if survive(curve, params, method, lo, budget, backend)[0] < budget:
        raise StepFailure(f"lower bracket dt={lo:g} is already unstable", dt=lo)
    if survive(curve, params, method, hi, budget, backend)[0] >= budget:
        return hi
    a, b = math.log(lo), math.log(hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        if survive(curve, params, method, math.exp(m), budget, backend)[0] >= budget:
            a = m
        else:
            b = m
    return math.exp(a)
