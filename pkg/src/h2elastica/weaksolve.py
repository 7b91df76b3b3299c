"""Weak-form H^2(ds) gradient: Galerkin solve over the real trigonometric basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .curve import differentiate, geometry
from .energy import as_params
from .errors import FactorizationError

FAST_PATH_TOL = 1e-10


def trig_basis(n):
    """Columns ``1, cos 2pi k u, sin 2pi k u (k < N/2), cos pi N u`` sampled on the grid."""
    u = np.arange(n) / n
    cols = [np.ones(n)]
    for k in range(1, n // 2):
        cols.append(np.cos(2 * np.pi * k * u))
        cols.append(np.sin(2 * np.pi * k * u))
    cols.append(np.cos(np.pi * n * u))
    return np.column_stack(cols)


def basis_wavenumbers(n):
    ks = [0]
    for k in range(1, n // 2):
        ks += [k, k]
    ks.append(n // 2)
    return np.array(ks)


@dataclass(frozen=True)
class GramSystem:
    """Galerkin system for one curve.

    ``block`` is the N x N Gram matrix of the scalar basis; the H^2(ds)
    product does not couple coordinates, so the full (dim*N) matrix is
    ``kron(I_dim, block)`` with coordinate-major ordering.
    """

    block: np.ndarray
    basis: np.ndarray
    dim: int
    rhs: np.ndarray | None = None

    @property
    def matrix(self):
        return np.kron(np.eye(self.dim), self.block)

    @property
    def rhs_vector(self):
        return None if self.rhs is None else self.rhs.T.reshape(-1)


def _arc_basis(curve):
    geo = geometry(curve)
    phi = trig_basis(curve.n_samples)
    p1 = differentiate(phi, 1)
    p2 = differentiate(phi, 2)
    ps = p1 / geo.speed[:, None]
    pss = p2 / geo.speed[:, None] ** 2 - geo.tangential_rate[:, None] * p1
    return geo, phi, ps, pss


def assemble_gram(curve, params=None):
    """Gram matrix of the H^2(ds) product over the trigonometric basis.

    With ``params`` the right-hand side ``dE(basis)`` (shape N x dim) is
    assembled as well.
    """
    geo, phi, ps, pss = _arc_basis(curve)
    w = geo.weights[:, None]
    block = phi.T @ (w * phi) + ps.T @ (w * ps) + pss.T @ (w * pss)
    block = 0.5 * (block + block.T)
    rhs = None
    if params is not None:
        p = as_params(params)
        a = 2 * geo.kappa * w
        b = (3 * geo.ksq - p.lam2)[:, None] * geo.tangent * w
        rhs = pss.T @ a - ps.T @ b
    return GramSystem(block=block, basis=phi, dim=curve.dim, rhs=rhs)


def _fast_path(curve, params):
    geo = geometry(curve)
    p = as_params(params)
    n = curve.n_samples
    L = geo.length
    src = differentiate(2 * geo.kappa, 2) / L**2 + differentiate((3 * geo.ksq - p.lam2)[:, None] * geo.tangent, 1) / L
    k = np.arange(n // 2 + 1)
    om2 = (2 * np.pi * k) ** 2
    om1 = om2.copy()
    om1[-1] = 0.0
    mult = 1.0 / (1 + om1 / L**2 + om2**2 / L**4)
    return np.fft.irfft(mult[:, None] * np.fft.rfft(src, axis=0), n=n, axis=0)


def is_constant_speed(curve, tol=FAST_PATH_TOL):
    geo = geometry(curve)
    return float(np.max(np.abs(geo.speed - geo.length))) < tol * geo.length


def h2_gradient_weak(curve, params, fast_path=True):
    """Solve ``<g, v>_{H^2(ds)} = dE(v)`` for all trigonometric test fields ``v``."""
    if fast_path and is_constant_speed(curve):
        return _fast_path(curve, params)
    system = assemble_gram(curve, params)
    try:
        factor = scipy.linalg.cho_factor(system.block, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise FactorizationError(f"H^2(ds) Gram matrix is not positive definite: {exc}") from exc
    coeffs = scipy.linalg.cho_solve(factor, system.rhs)
    return system.basis @ coeffs


def solve_residual(curve, params, grad):
    """Relative residual ``|M c - rhs| / |rhs|`` of a gradient field in the Galerkin system."""
    system = assemble_gram(curve, params)
    coeffs = np.linalg.solve(system.basis, grad)
    r = system.block @ coeffs - system.rhs
    return float(np.linalg.norm(r) / max(np.linalg.norm(system.rhs), 1e-300))
