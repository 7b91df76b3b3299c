"""Green's function of ``d_s^4 - d_s^2 + 1`` on a circle of length L, and the
kernel-quadrature H^2(ds) gradient.

The kernel is ``G(s, t) = A(L - |s - t|, |s - t|) / beta(L)`` with

    A(x1, x2) = sinh(a x1) cos(x2/2) + sinh(a x2) cos(x1/2)
                + sqrt3 cosh(a x1) sin(x2/2) + sqrt3 cosh(a x2) sin(x1/2)
    beta(L)   = 2 sqrt3 (cosh(a L) - cos(L/2)),         a = sqrt3 / 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .curve import ClosedCurve, geometry, resample
from .energy import as_params

SQRT3 = np.sqrt(3.0)
A_RATE = SQRT3 / 2
B_RATE = 0.5
SCALED_ABOVE = 60.0
# Quadrature nodes per curve sample; the integrand is smooth apart from a
# third-derivative jump on the diagonal, so the trapezoid rule aliases at
# roughly 2 (k / (OVERSAMPLE N))^4 for mode k.
OVERSAMPLE = 16


def _hyp(x, order, func, shift):
    """``d^order/dx^order`` of sinh/cosh(a x), times ``exp(-a shift)``."""
    odd = order % 2
    use_sinh = (func == "sinh") != bool(odd)
    if shift:
        ep = np.exp(A_RATE * (x - shift))
        em = np.exp(-A_RATE * (x + shift))
        val = 0.5 * (ep - em) if use_sinh else 0.5 * (ep + em)
    else:
        val = np.sinh(A_RATE * x) if use_sinh else np.cosh(A_RATE * x)
    return A_RATE**order * val


def _trig(x, order, func):
    phase = order * np.pi / 2
    val = np.cos(B_RATE * x + phase) if func == "cos" else np.sin(B_RATE * x + phase)
    return B_RATE**order * val


def _A_partial(x1, x2, p, q, shift=0.0):
    """``d1^p d2^q A(x1, x2)``, optionally scaled by ``exp(-a shift)``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return (
        _hyp(x1, p, "sinh", shift) * _trig(x2, q, "cos")
        + _hyp(x2, q, "sinh", shift) * _trig(x1, p, "cos")
        + SQRT3 * _hyp(x1, p, "cosh", shift) * _trig(x2, q, "sin")
        + SQRT3 * _hyp(x2, q, "cosh", shift) * _trig(x1, p, "sin")
    )


def _A_directional(x1, x2, m, shift=0.0):
    """``(d2 - d1)^m A``."""
    return sum(comb(m, i) * (-1) ** i * _A_partial(x1, x2, i, m - i, shift) for i in range(m + 1))


def A_func(x1, x2):
    return _A_partial(x1, x2, 0, 0)


@dataclass(frozen=True)
class APartials:
    d1: np.ndarray
    d2: np.ndarray
    dir1: np.ndarray
    dir2: np.ndarray
    dir3: np.ndarray


def A_partials(x1, x2):
    """First partials of A and the directional derivatives ``(d2 - d1)^m A``, m = 1..3."""
    return APartials(
        d1=_A_partial(x1, x2, 1, 0),
        d2=_A_partial(x1, x2, 0, 1),
        dir1=_A_directional(x1, x2, 1),
        dir2=_A_directional(x1, x2, 2),
        dir3=_A_directional(x1, x2, 3),
    )


def beta(length):
    length = np.asarray(length, dtype=float)
    return 2 * SQRT3 * (np.cosh(A_RATE * length) - np.cos(B_RATE * length))


@dataclass(frozen=True)
class GreensKernel:
    """Periodic Green's function for a curve of length ``length``."""

    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("kernel length must be positive")

    @property
    def scaled(self):
        return self.length > SCALED_ABOVE

    @property
    def beta_L(self):
        return float(beta(self.length))

    def _beta_scaled(self):
        L = self.length
        if not self.scaled:
            return self.beta_L
        return 2 * SQRT3 * (0.5 * (1 + np.exp(-2 * A_RATE * L)) - np.cos(B_RATE * L) * np.exp(-A_RATE * L))

    def ratio(self, x1, x2, m):
        """``(d2 - d1)^m A(x1, x2) / beta(L)``, overflow safe for large L."""
        shift = self.length if self.scaled else 0.0
        return _A_directional(x1, x2, m, shift) / self._beta_scaled()

    def _check(self, *args):
        L = self.length
        tol = 1e-12 * max(L, 1.0)
        for a in args:
            a = np.asarray(a)
            if np.any(a < -tol) or np.any(a > L + tol):
                raise ValueError(f"kernel arguments must lie in [0, {L}]")


def green(kernel, s, t):
    kernel._check(s, t)
    d = np.abs(np.asarray(s, dtype=float) - np.asarray(t, dtype=float))
    return kernel.ratio(kernel.length - d, d, 0)


def green_ds_tilde(kernel, s, t):
    """Arc-length derivative of ``G(s, t)`` in its second slot; zero on the diagonal."""
    kernel._check(s, t)
    diff = np.asarray(s, dtype=float) - np.asarray(t, dtype=float)
    d = np.abs(diff)
    return -np.sign(diff) * kernel.ratio(kernel.length - d, d, 1)


def jump_check(kernel):
    """Jump of ``d1^3 G`` across the diagonal (should be exactly 1)."""
    return float(2 * kernel.ratio(kernel.length, 0.0, 3))


def apply_kernel(kernel, s_targets, s_sources, weighted_values):
    """``sum_m G(s_j, s_m) f_m`` for pre-weighted source values ``f_m``."""
    G = green(kernel, np.asarray(s_targets)[:, None], np.asarray(s_sources)[None, :])
    return G @ weighted_values


def h2_gradient_kernel(curve, params, oversample=OVERSAMPLE):
    """H^2(ds) gradient from the closed-form kernel representation.

    ``grad(u_j) = 2 gamma_j - int [2 G gamma + G_t T (3k^2 + 2 - lambda^2)] ds``
    with the integral taken by the trapezoid rule on a band-limited refinement
    of the curve with ``oversample * N`` nodes.
    """
    p = as_params(params)
    geo = geometry(curve)
    n = curve.n_samples
    m = n * int(oversample)
    fine = curve if m == n else ClosedCurve(resample(curve.points, m))
    fgeo = geometry(fine)
    kernel = GreensKernel(geo.length)
    L = geo.length
    s_t = np.clip(geo.arclen, 0.0, L)
    s_f = np.clip(fgeo.arclen, 0.0, L)
    w = fgeo.speed / m
    diff = s_t[:, None] - s_f[None, :]
    d = np.abs(diff)
    G = kernel.ratio(L - d, d, 0)
    Gt = -np.sign(diff) * kernel.ratio(L - d, d, 1)
    src0 = 2 * fine.points * w[:, None]
    src1 = fgeo.tangent * ((3 * fgeo.ksq + 2 - p.lam2) * w)[:, None]
    return 2 * curve.points - G @ src0 - Gt @ src1
