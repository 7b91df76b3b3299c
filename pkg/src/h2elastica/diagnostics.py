"""Convergence diagnostics: Lojasiewicz exponent fits, limit classification,
and invariance audits under reparametrisation and translation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .curve import ClosedCurve, evaluate_periodic, geometry, h2ds_norm, rotation_index
from .energy import as_params, el_residual, energy
from .errors import InsufficientTailError
from .flow import gradient

MIN_TAIL = 20
WINDOW = (1e-10, 1e-3)
FIT_RESIDUAL_MAX = 0.1


@dataclass(frozen=True)
class LojasiewiczFit:
    theta: float
    Z: float
    fit_window: tuple
    residual: float
    E_inf: float
    n_points: int

    @property
    def reliable(self):
        return self.residual < FIT_RESIDUAL_MAX

    def to_dict(self):
        d = asdict(self)
        d["fit_window"] = list(self.fit_window)
        d["reliable"] = self.reliable
        return d


def fit_lojasiewicz(times, energies=None, grad_norms=None, window=WINDOW, min_points=MIN_TAIL):
    """Fit ``log|grad| = log Z + theta log(E - E_inf)`` on the trajectory tail.

    Accepts a trajectory (anything with ``times``, ``energies`` and
    ``grad_norms``) or the three arrays.  ``E_inf`` is the last energy.  Only
    records with ``E - E_inf`` inside ``window * E(0)`` are used, and the last
    decade above the smallest positive gap is dropped.
    """
    if energies is None:
        traj = times
        times, energies, grad_norms = traj.times, traj.energies, traj.grad_norms
    t = np.asarray(times, dtype=float)
    E = np.asarray(energies, dtype=float)
    g = np.asarray(grad_norms, dtype=float)
    if not (t.shape == E.shape == g.shape):
        raise ValueError("times, energies and grad_norms must have equal length")
    E_inf = float(E[-1])
    gap = E - E_inf
    positive = gap[gap > 0]
    if positive.size == 0:
        raise InsufficientTailError("no energy decrease recorded")
    lo = max(window[0] * abs(E[0]), 10 * positive.min())
    hi = window[1] * abs(E[0])
    mask = (gap >= lo) & (gap <= hi) & (g > 0)
    n = int(mask.sum())
    if n < min_points:
        raise InsufficientTailError(f"{n} records in fit window, need {min_points}")
    x, y = np.log(gap[mask]), np.log(g[mask])
    theta, logZ = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (theta * x + logZ)) ** 2)))
    tw = t[mask]
    return LojasiewiczFit(
        theta=float(theta), Z=float(np.exp(logZ)), fit_window=(float(tw.min()), float(tw.max())),
        residual=resid, E_inf=E_inf, n_points=n,
    )


def synthetic_power_law(theta, Z=1.0, E_inf=1.0, E0=2.0, n=200, rate=0.1):
    """Trajectory columns with ``|grad| = Z (E - E_inf)^theta`` exactly.

    The gap decays geometrically from ``E0 - E_inf`` and the last record sits
    on ``E_inf``.
    """
    gap = (E0 - E_inf) * np.exp(-rate * np.arange(n))
    gap[-1] = 0.0
    t = np.arange(n, dtype=float)
    return t, E_inf + gap, Z * gap**theta


# -- limit classification -----------------------------------------------------------------


@dataclass(frozen=True)
class LimitReport:
    classification: str
    center: tuple | None
    radius: float | None
    multiplicity: int | None
    rotation_index: int | None
    curvature_mean: float
    curvature_std: float
    stationarity_norm: float

    def to_dict(self):
        return asdict(self)


def classify_limit(curve, params, stationarity_tol=1e-3, roundness_tol=1e-2):
    """Classify a (near) stationary curve as ``Circle``, ``FigureEight`` or ``Unclassified``.

    Circles need ``std k / mean k < roundness_tol`` and an Euler-Lagrange
    residual below ``stationarity_tol``; a planar curve with rotation index 0
    is reported as a figure-eight candidate.
    """
    p = as_params(params)
    geo = geometry(curve)
    w = geo.weights / geo.length
    k = np.sqrt(geo.ksq)
    k_mean = float(np.dot(k, w))
    k_std = float(np.sqrt(np.dot((k - k_mean) ** 2, w)))
    _, stat = el_residual(curve, p)
    rot = rotation_index(curve) if curve.dim == 2 else None
    kind, center, radius, mult = "Unclassified", None, None, None
    if k_mean > 0 and k_std / k_mean < roundness_tol and stat < stationarity_tol:
        c = curve.points.mean(axis=0)
        radius = float(np.linalg.norm(curve.points - c, axis=1).mean())
        center = tuple(float(x) for x in c)
        mult = abs(rot) if rot else int(round(geo.length / (2 * np.pi * radius)))
        kind = "Circle"
    elif rot == 0:
        kind = "FigureEight"
    return LimitReport(kind, center, radius, mult, rot, k_mean, k_std, float(stat))


# -- invariance ---------------------------------------------------------------------------


def random_diffeo(seed, modes=3, amplitude=0.1, min_slope=0.2, retries=100):
    """Random band-limited orientation-preserving diffeomorphism of the circle.

    ``psi(u) = u + sum_k (a_k sin 2pi k u + b_k (1 - cos 2pi k u)) / (2 pi k)``;
    candidates with ``min psi' <= min_slope`` are redrawn.
    """
    rng = np.random.default_rng(seed)
    probe = np.linspace(0, 1, 2048, endpoint=False)
    for _ in range(retries):
        a = rng.normal(scale=amplitude, size=modes)
        b = rng.normal(scale=amplitude, size=modes)
        ks = np.arange(1, modes + 1)

        def psi(u, a=a, b=b):
            u = np.asarray(u, dtype=float)
            arg = 2 * np.pi * np.multiply.outer(u, ks)
            return u + (np.sin(arg) @ (a / (2 * np.pi * ks)) + (1 - np.cos(arg)) @ (b / (2 * np.pi * ks)))

        slope = 1 + np.cos(2 * np.pi * np.outer(probe, ks)) @ a + np.sin(2 * np.pi * np.outer(probe, ks)) @ b
        if slope.min() > min_slope:
            return psi
    raise RuntimeError("could not draw a monotone reparametrisation")


def reparametrize(curve, psi):
    """``gamma o psi`` sampled on the grid via the trigonometric interpolant."""
    return ClosedCurve(evaluate_periodic(curve.points, psi(curve.params)))


@dataclass(frozen=True)
class InvarianceReport:
    energy: float
    grad_norm: float
    energy_diffeo: float
    grad_diffeo: float
    energy_translation: float
    grad_translation: float

    def to_dict(self):
        return asdict(self)


def _rel(a, b):
    # unit floor: near-stationary curves have |grad| at roundoff level
    return abs(a - b) / max(abs(b), 1.0)


def invariance_audit(curve, params, diffeo_seed=0, translation=None, diffeo=None, backend="weak"):
    """Changes in ``E`` and ``|grad|_{H^2(ds)}`` under reparametrisation and translation.

    Discrepancies are relative to ``max(|reference|, 1)``.

    ``diffeo`` overrides the random one drawn from ``diffeo_seed``; pass
    ``diffeo_seed=None`` for the identity.
    """
    p = as_params(params)

    def measure(c):
        return energy(c, p), h2ds_norm(c, gradient(c, p, backend))

    E0, g0 = measure(curve)
    if diffeo is None:
        diffeo = (lambda u: u) if diffeo_seed is None else random_diffeo(diffeo_seed)
    E1, g1 = measure(reparametrize(curve, diffeo))
    if translation is None:
        translation = np.ones(curve.dim)
    E2, g2 = measure(curve.translated(np.asarray(translation, dtype=float)))
    return InvarianceReport(E0, g0, _rel(E1, E0), _rel(g1, g0), _rel(E2, E0), _rel(g2, g0))
