"""Arc-length-proportional parametrisations: the constraint map, its derivative,
the projection onto constant-speed curves, and the right inverse / tangent
projection built from a controllability Gramian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .curve import (
    ClosedCurve,
    antiderivative,
    check_field,
    check_scalar,
    differentiate,
    evaluate_periodic,
    geometry,
    resample,
)
from .errors import FrameDriftError, NonZeroMeanError, SingularGramianError

FRAME_DRIFT_TOL = 1e-6
FRAME_SUBSTEPS = 8
GRAMIAN_FLOOR = 1e-12


def phi(curve):
    """Pointwise ``|gamma'| - L``; vanishes exactly on constant-speed curves."""
    geo = geometry(curve)
    return geo.speed - geo.length


def dphi(curve, v):
    """Derivative of :func:`phi` in direction ``v``: ``<v', T>`` minus its mean."""
    v = check_field(curve, v)
    geo = geometry(curve)
    a = np.einsum("ij,ij->i", differentiate(v, 1), geo.tangent)
    return a - a.mean()


def arclength_function(curve, u):
    """Arc length ``s(u)`` at arbitrary parameters, from the spectral antiderivative of speed."""
    geo = geometry(curve)
    u = np.asarray(u, dtype=float)
    return geo.length * u + evaluate_periodic(antiderivative(geo.speed), u)


def arclength_inverse(curve, targets, tol=1e-15, max_iter=30):
    """Parameters ``u`` with ``s(u) = targets`` (monotone cubic guess, Newton polish)."""
    geo = geometry(curve)
    n = curve.n_samples
    L = geo.length
    knots_s = np.append(geo.arclen, L)
    knots_u = np.append(curve.params, 1.0)
    u = PchipInterpolator(knots_s, knots_u)(targets)
    speed_hat = geo.speed
    for _ in range(max_iter):
        resid = arclength_function(curve, u) - targets
        step = resid / evaluate_periodic(speed_hat, u)
        u = u - step
        if np.max(np.abs(step)) < tol:
            break
    return u


def project_arclength(curve):
    """Resample ``curve`` at equal arc-length spacing (the constant-speed reparametrisation)."""
    geo = geometry(curve)
    n = curve.n_samples
    u = arclength_inverse(curve, geo.length * np.arange(n) / n)
    return ClosedCurve(evaluate_periodic(curve.points, u))


# -- frames and the Gramian -------------------------------------------------------------


@dataclass(frozen=True)
class FrameBundle:
    """Normals ``nu_i`` (shape (dim-1, N, dim)) transported along the curve."""

    normals: np.ndarray
    initial_basis: np.ndarray

    def drift(self, tangent):
        """Largest deviation from orthonormality of ``{T, nu_i}`` over the grid."""
        nu = self.normals
        worst = np.max(np.abs(np.einsum("inj,nj->in", nu, tangent)))
        gram = np.einsum("inj,knj->nik", nu, nu)
        eye = np.eye(nu.shape[0])
        return float(max(worst, np.max(np.abs(gram - eye))))


def seed_basis(t0):
    """Complete ``t0`` to an orthonormal basis by Gram-Schmidt on coordinate axes.

    The axis most parallel to ``t0`` is skipped; remaining axes are used in
    order of increasing ``|<e_k, t0>|`` (ties by index).
    """
    t0 = np.asarray(t0, dtype=float)
    t0 = t0 / np.linalg.norm(t0)
    dim = t0.size
    order = np.argsort(np.abs(t0), kind="stable")[: dim - 1]
    basis = [t0]
    for k in order:
        e = np.zeros(dim)
        e[k] = 1.0
        for b in basis:
            e -= np.dot(e, b) * b
        basis.append(e / np.linalg.norm(e))
    return np.array(basis)


def build_frame(curve, substeps=FRAME_SUBSTEPS, drift_tol=FRAME_DRIFT_TOL):
    """Integrate ``nu' = -|gamma'|^-2 <nu, gamma''> gamma'`` from an orthonormal seed.

    Classical RK4 with ``substeps`` steps per grid interval; stage values of
    ``gamma'`` and ``gamma''`` come from the band-limited interpolant.
    """
    key = ("frame", substeps)
    if key in curve._cache:
        return curve._cache[key]
    geo = geometry(curve)
    n, dim = curve.points.shape
    m = 2 * n * substeps
    d1 = resample(geo.d1, m)
    d2 = resample(geo.d2, m)
    coef = d1 / np.einsum("ij,ij->i", d1, d1)[:, None]
    h = 1.0 / (n * substeps)

    def rhs(nu, idx):
        return -np.outer(nu @ d2[idx], coef[idx])

    basis = seed_basis(geo.tangent[0])
    nu = basis[1:].copy()
    out = np.empty((dim - 1, n, dim))
    out[:, 0] = nu
    for step in range(n * substeps):
        i0 = 2 * step
        k1 = rhs(nu, i0)
        k2 = rhs(nu + 0.5 * h * k1, i0 + 1)
        k3 = rhs(nu + 0.5 * h * k2, i0 + 1)
        k4 = rhs(nu + h * k3, (i0 + 2) % m)
        nu = nu + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (step + 1) % substeps == 0 and (step + 1) // substeps < n:
            out[:, (step + 1) // substeps] = nu
    frame = FrameBundle(normals=out, initial_basis=basis)
    drift = frame.drift(geo.tangent)
    if drift > drift_tol:
        raise FrameDriftError(f"frame orthonormality drift {drift:.2e} exceeds {drift_tol:.0e}")
    curve._cache[key] = frame
    return frame


def cutoff(u):
    """Smooth bump ``sin^2(pi u)`` vanishing with its derivative at u = 0, 1."""
    return np.sin(np.pi * np.asarray(u)) ** 2


@dataclass(frozen=True)
class Gramian:
    W: np.ndarray
    bump: np.ndarray
    mu: float

    @property
    def inv_norm(self):
        return 1.0 / self.mu


def control_matrix(curve, frame):
    """``B(u_j) = beta(u_j) [nu_1 ... nu_{dim-1}]`` as an (N, dim, dim-1) array."""
    bump = cutoff(curve.params)
    return bump[:, None, None] * np.transpose(frame.normals, (1, 2, 0))


def gramian(curve, frame=None):
    """``W = int_0^1 B B^T du`` by the trapezoid rule, with its smallest eigenvalue."""
    frame = build_frame(curve) if frame is None else frame
    B = control_matrix(curve, frame)
    W = np.einsum("nij,nkj->ik", B, B) / curve.n_samples
    W = 0.5 * (W + W.T)
    mu = float(np.linalg.eigvalsh(W)[0])
    if mu < GRAMIAN_FLOOR:
        raise SingularGramianError(f"Gramian smallest eigenvalue {mu:.3e} below {GRAMIAN_FLOOR:.0e}")
    return Gramian(W=W, bump=cutoff(curve.params), mu=mu)


def right_inverse(curve, w, frame=None, gram=None, return_defect=False):
    """Right inverse of :func:`dphi`: a periodic field ``v`` with ``dphi(v) = w``.

    ``v = y - x`` with ``y' = w T`` and ``x' = B xi``, ``xi = B^T W^-1 y(1)``,
    both started at zero.  The control ``xi`` makes ``v(1) = v(0)``.
    """
    w = check_scalar(curve, w)
    scale = max(float(np.max(np.abs(w))), 1.0)
    if abs(w.mean()) > 1e-10 * scale:
        raise NonZeroMeanError(f"input has mean {w.mean():.3e}")
    geo = geometry(curve)
    frame = build_frame(curve) if frame is None else frame
    gram = gramian(curve, frame) if gram is None else gram
    B = control_matrix(curve, frame)
    y_prime = w[:, None] * geo.tangent
    y1 = y_prime.mean(axis=0)
    target = np.linalg.solve(gram.W, y1)
    xi = np.einsum("nij,i->nj", B, target)
    x_prime = np.einsum("nij,nj->ni", B, xi)
    v_prime = y_prime - x_prime
    defect = float(np.linalg.norm(v_prime.mean(axis=0)))
    v = antiderivative(v_prime)
    return (v, defect) if return_defect else v


def tangent_project(curve, V, frame=None, gram=None):
    """``(1 - r dphi) V``: the component of ``V`` tangent to the constant-speed curves."""
    V = check_field(curve, V)
    return V - right_inverse(curve, dphi(curve, V), frame=frame, gram=gram)
