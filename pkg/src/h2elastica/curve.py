"""Discrete closed curves and spectrally accurate periodic differential geometry.

A closed curve is stored as ``N`` samples of a 1-periodic map at the uniform
parameters ``u_j = j / N``.  All derivatives are trigonometric (FFT based), all
integrals are periodic trapezoid sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonImmersedError, ShapeMismatchError

IMMERSION_FLOOR = 1e-9
MIN_SAMPLES = 16


# -- periodic spectral primitives ---------------------------------------------------


def _check_even(n):
    if n % 2:
        raise ValueError(f"number of samples must be even, got {n}")


def _as_2d(field):
    f = np.asarray(field, dtype=float)
    return (f[:, None], True) if f.ndim == 1 else (f, False)


def differentiate(field, order=1):
    """Trigonometric derivative d^order/du^order of periodic samples on [0, 1).

    The derivative acts along axis 0.  The Nyquist mode is treated as the
    cosine ``cos(pi N u)``; its odd-order derivatives vanish on the grid and
    are zeroed.
    """
    if order not in (1, 2, 3, 4):
        raise ValueError(f"order must be in 1..4, got {order}")
    f, flat = _as_2d(field)
    n = f.shape[0]
    _check_even(n)
    k = np.arange(n // 2 + 1)
    mult = (2j * np.pi * k) ** order
    if order % 2:
        mult[-1] = 0.0
    out = np.fft.irfft(mult[:, None] * np.fft.rfft(f, axis=0), n=n, axis=0)
    return out[:, 0] if flat else out


def antiderivative(field):
    """Periodic antiderivative of the zero-mean part of ``field``.

    Returns ``F`` with ``F' = f - mean(f)`` in the trigonometric sense, pinned
    so that ``F[0] == 0``.
    """
    f, flat = _as_2d(field)
    n = f.shape[0]
    _check_even(n)
    fh = np.fft.rfft(f, axis=0)
    k = np.arange(n // 2 + 1)
    div = np.zeros(n // 2 + 1, dtype=complex)
    div[1:-1] = 1.0 / (2j * np.pi * k[1:-1])
    out = np.fft.irfft(div[:, None] * fh, n=n, axis=0)
    out -= out[0]
    return out[:, 0] if flat else out


def evaluate_periodic(samples, u):
    """Evaluate the trigonometric interpolant of ``samples`` at parameters ``u``."""
    f, flat = _as_2d(samples)
    n = f.shape[0]
    _check_even(n)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    c = np.fft.rfft(f, axis=0) / n
    c[1:-1] *= 2.0
    k = np.arange(n // 2)
    phase = np.exp(2j * np.pi * np.outer(u, k))
    out = (phase @ c[:-1]).real + np.outer(np.cos(np.pi * n * u), c[-1].real)
    return out[:, 0] if flat else out


def resample(samples, m):
    """Band-limited resampling of periodic samples onto ``m`` uniform nodes (``m >= N``)."""
    f, flat = _as_2d(samples)
    n = f.shape[0]
    _check_even(n)
    if m < n:
        raise ValueError("resample only supports refinement")
    fh = np.fft.rfft(f, axis=0)
    fh[-1] *= 0.5  # Nyquist cosine splits evenly between +-N/2
    g = np.zeros((m // 2 + 1, f.shape[1]), dtype=complex)
    g[: n // 2 + 1] = fh
    if m == n:
        g[-1] *= 2.0
    out = np.fft.irfft(g, n=m, axis=0) * (m / n)
    return out[:, 0] if flat else out


# -- curves ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """``N`` uniformly spaced samples of a closed curve in R^dim.

    ``points[j]`` is the curve at ``u_j = j / N``.  The array is copied and
    made read-only on construction.
    """

    points: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2:
            raise ShapeMismatchError(f"points must be an (N, dim) array, got shape {pts.shape}")
        n, dim = pts.shape
        if dim < 2:
            raise ShapeMismatchError(f"ambient dimension must be >= 2, got {dim}")
        if n % 2 or n < MIN_SAMPLES:
            raise ShapeMismatchError(f"N must be even and >= {MIN_SAMPLES}, got {n}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("curve samples contain non-finite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_samples(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def params(self):
        return np.arange(self.n_samples) / self.n_samples

    def translated(self, offset):
        return ClosedCurve(self.points + np.asarray(offset, dtype=float))

    def scaled(self, factor):
        return ClosedCurve(self.points * float(factor))

    def __add__(self, field):
        return ClosedCurve(self.points + check_field(self, field))

    def __sub__(self, field):
        return ClosedCurve(self.points - check_field(self, field))

    @classmethod
    def from_function(cls, func, n_samples):
        """Sample ``func(u)``, which returns an (N, dim) array or a tuple of coordinates."""
        u = np.arange(n_samples) / n_samples
        vals = func(u)
        pts = np.column_stack(vals) if isinstance(vals, (tuple, list)) else np.asarray(vals)
        return cls(pts)


def check_field(curve, values):
    """Validate that ``values`` is an (N, dim) field on ``curve``'s grid."""
    v = np.asarray(values, dtype=float)
    if v.shape != curve.points.shape:
        raise ShapeMismatchError(f"field shape {v.shape} does not match curve {curve.points.shape}")
    return v


def check_scalar(curve, values):
    s = np.asarray(values, dtype=float)
    if s.shape != (curve.n_samples,):
        raise ShapeMismatchError(f"scalar samples of shape {s.shape}, expected ({curve.n_samples},)")
    return s


@dataclass(frozen=True)
class CurveGeometry:
    """Derived geometry of a curve on its sample grid.

    ``d1`` and ``d2`` are the parameter derivatives; ``tangential_rate`` is
    ``<d2, d1> / |d1|^4``, the coefficient appearing in the chain rule for the
    second arc-length derivative.
    """

    speed: np.ndarray
    tangent: np.ndarray
    kappa: np.ndarray
    ksq: np.ndarray
    arclen: np.ndarray
    length: float
    d1: np.ndarray
    d2: np.ndarray
    tangential_rate: np.ndarray

    @property
    def weights(self):
        """Quadrature weights for integrals against ``ds``."""
        return self.speed / self.speed.size

    def ds(self, field):
        """First arc-length derivative ``f' / |gamma'|``."""
        f = np.asarray(field, dtype=float)
        return _scale_rows(differentiate(f, 1), 1.0 / self.speed)

    def dss(self, field):
        """Second arc-length derivative by the chain rule."""
        f = np.asarray(field, dtype=float)
        f1 = differentiate(f, 1)
        f2 = differentiate(f, 2)
        return _scale_rows(f2, self.speed**-2) - _scale_rows(f1, self.tangential_rate)

    def ds_iter(self, field, times=1):
        """Arc-length derivative applied ``times`` times as ``|gamma'|^-1 d/du``."""
        f = np.asarray(field, dtype=float)
        for _ in range(times):
            f = self.ds(f)
        return f


def _scale_rows(a, s):
    return a * s if a.ndim == 1 else a * s[:, None]


def geometry(curve, floor=IMMERSION_FLOOR):
    """Speed, unit tangent, curvature vector, arc length and length of ``curve``.

    Raises :class:`NonImmersedError` if the minimum speed is at or below
    ``floor``.  The result is cached on the (immutable) curve.
    """
    key = ("geometry", floor)
    if key in curve._cache:
        return curve._cache[key]
    g1 = differentiate(curve.points, 1)
    g2 = differentiate(curve.points, 2)
    speed = np.linalg.norm(g1, axis=1)
    smin = float(speed.min())
    if not smin > floor:
        raise NonImmersedError(smin, floor)
    tangent = g1 / speed[:, None]
    rate = np.einsum("ij,ij->i", g2, g1) / speed**4
    kappa = g2 / speed[:, None] ** 2 - rate[:, None] * g1
    ksq = np.einsum("ij,ij->i", kappa, kappa)
    length = float(speed.mean())
    arclen = length * curve.params + antiderivative(speed)
    geo = CurveGeometry(speed, tangent, kappa, ksq, arclen, length, g1, g2, rate)
    curve._cache[key] = geo
    return geo


def integrate_ds(curve, scalar_samples):
    """Periodic trapezoid approximation of ``int f ds``."""
    f = check_scalar(curve, scalar_samples)
    geo = geometry(curve)
    return float(np.dot(f, geo.speed) / curve.n_samples)


def _dot(a, b):
    return np.einsum("ij,ij->i", a, b)


def h2ds_inner(curve, v, w):
    """The curve-dependent inner product ``int <v,w> + <v_s,w_s> + <v_ss,w_ss> ds``."""
    v = check_field(curve, v)
    w = check_field(curve, w)
    geo = geometry(curve)
    integrand = _dot(v, w) + _dot(geo.ds(v), geo.ds(w)) + _dot(geo.dss(v), geo.dss(w))
    return float(np.dot(integrand, geo.weights))


def h2ds_norm(curve, v):
    return float(np.sqrt(max(h2ds_inner(curve, v, v), 0.0)))


def l2ds_norm(curve, v):
    v = check_field(curve, v)
    return float(np.sqrt(np.dot(_dot(v, v), geometry(curve).weights)))


def h2_norm(v):
    """Parameter-space (``du``) H^2 norm of a periodic field."""
    v, _ = _as_2d(v)
    total = sum(np.sum(differentiate(v, k) ** 2) for k in (1, 2)) + np.sum(v**2)
    return float(np.sqrt(total / v.shape[0]))


def rotation_index(curve):
    """Winding number of the unit tangent of a planar curve."""
    if curve.dim != 2:
        raise ValueError("rotation index is defined for planar curves only")
    geo = geometry(curve)
    cross = geo.d1[:, 0] * geo.d2[:, 1] - geo.d1[:, 1] * geo.d2[:, 0]
    turning = np.mean(cross / geo.speed**2)
    return int(np.rint(turning / (2 * np.pi)))


def total_turning(curve):
    """``int |k| ds``, the total absolute curvature."""
    geo = geometry(curve)
    return integrate_ds(curve, np.sqrt(geo.ksq))


# -- fixtures ---------------------------------------------------------------------------


def _embed(planar, dim):
    pts = np.zeros((planar.shape[0], dim))
    pts[:, :2] = planar
    return pts


def make_curve(shape, n_samples=128, dim=2, **params):
    """Sampled fixture curves.

    Shapes
    ------
    ``circle``        radius ``r`` (default 1), traversed ``p`` times (default 1),
                      optional ``center``.
    ``ellipse``       semi-axes ``a``, ``b``.
    ``figure_eight``  lemniscate of Gerono ``scale * (sin 2pi u, sin 2pi u cos 2pi u)``.
    ``fourier``       random Fourier curve: unit circle plus modes ``1..kmax`` with
                      coefficient scale ``amplitude * exp(-decay * (k - 1))``.
    """
    _check_even(n_samples)
    u = np.arange(n_samples) / n_samples
    th = 2 * np.pi * u
    if shape == "circle":
        r = float(params.get("r", 1.0))
        p = int(params.get("p", 1))
        if r <= 0 or p < 1:
            raise ValueError("circle needs r > 0 and p >= 1")
        pts = _embed(r * np.column_stack([np.cos(p * th), np.sin(p * th)]), dim)
        pts = pts + np.asarray(params.get("center", np.zeros(dim)), dtype=float)
    elif shape == "ellipse":
        a, b = float(params.get("a", 1.3)), float(params.get("b", 0.7))
        if a <= 0 or b <= 0:
            raise ValueError("ellipse needs positive semi-axes")
        pts = _embed(np.column_stack([a * np.cos(th), b * np.sin(th)]), dim)
    elif shape in ("figure_eight", "figure-eight", "eight"):
        c = float(params.get("scale", 1.0))
        if c <= 0:
            raise ValueError("figure_eight needs scale > 0")
        pts = _embed(c * np.column_stack([np.sin(th), np.sin(th) * np.cos(th)]), dim)
    elif shape in ("fourier", "fourier_random"):
        pts = _fourier_random(u, dim, **params)
    else:
        raise ValueError(f"unknown shape {shape!r}")
    curve = ClosedCurve(pts)
    geometry(curve)
    return curve


def _fourier_random(u, dim, seed=0, decay=1.0, amplitude=0.1, kmax=8, retries=50):
    if decay <= 0 or amplitude <= 0:
        raise ValueError("fourier curve needs decay > 0 and amplitude > 0")
    rng = np.random.default_rng(seed)
    n = u.size
    kmax = min(int(kmax), n // 8)
    th = 2 * np.pi * u
    base = _embed(np.column_stack([np.cos(th), np.sin(th)]), dim)
    for _ in range(retries):
        pts = base.copy()
        for k in range(1, kmax + 1):
            scale = amplitude * np.exp(-decay * (k - 1))
            a = rng.normal(scale=scale, size=dim)
            b = rng.normal(scale=scale, size=dim)
            pts += np.outer(np.cos(k * th), a) + np.outer(np.sin(k * th), b)
        speed = np.linalg.norm(differentiate(pts, 1), axis=1)
        if speed.min() > 0.2 * speed.mean():
            return pts
    raise NonImmersedError(float(speed.min()), 0.2 * float(speed.mean()))
