import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ELLIPSE_13_07_LENGTH, GERONO_LENGTH, random_field
from h2elastica.curve import (
    ClosedCurve,
    antiderivative,
    differentiate,
    evaluate_periodic,
    geometry,
    h2ds_inner,
    h2ds_norm,
    integrate_ds,
    make_curve,
    resample,
    rotation_index,
)
from h2elastica.errors import NonImmersedError, ShapeMismatchError

coeffs = st.lists(st.floats(-1, 1, allow_nan=False), min_size=6, max_size=6)


def trig_poly(u, c):
    """sum_k c_{2k} cos 2pi(k+1)u + c_{2k+1} sin 2pi(k+1)u and its analytic derivatives."""
    val = np.zeros_like(u)
    d = {m: np.zeros_like(u) for m in (1, 2, 3, 4)}
    for j in range(3):
        k = 2 * np.pi * (j + 1)
        a, b = c[2 * j], c[2 * j + 1]
        val += a * np.cos(k * u) + b * np.sin(k * u)
        d[1] += k * (-a * np.sin(k * u) + b * np.cos(k * u))
        d[2] += -k**2 * (a * np.cos(k * u) + b * np.sin(k * u))
        d[3] += -k**3 * (-a * np.sin(k * u) + b * np.cos(k * u))
        d[4] += k**4 * (a * np.cos(k * u) + b * np.sin(k * u))
    return val, d


@settings(max_examples=40, deadline=None)
@given(c=coeffs, order=st.integers(1, 4))
def test_differentiate_exact_on_band_limited(c, order):
    u = np.arange(32) / 32
    f, d = trig_poly(u, c)
    scale = (2 * np.pi * 3) ** order
    assert np.max(np.abs(differentiate(f, order) - d[order])) < 1e-11 * scale


def test_differentiate_nyquist_odd_orders_vanish():
    u = np.arange(16) / 16
    nyq = np.cos(np.pi * 16 * u)
    assert np.allclose(differentiate(nyq, 1), 0, atol=1e-12)
    assert np.allclose(differentiate(nyq, 3), 0, atol=1e-9)
    assert np.allclose(differentiate(nyq, 2), -(np.pi * 16) ** 2 * nyq)


def test_differentiate_rejects_bad_order_and_odd_length():
    with pytest.raises(ValueError):
        differentiate(np.zeros(16), 5)
    with pytest.raises(ValueError):
        differentiate(np.zeros(15), 1)


@settings(max_examples=30, deadline=None)
@given(c=coeffs)
def test_antiderivative_inverts_derivative(c):
    u = np.arange(32) / 32
    f, _ = trig_poly(u, c)
    F = antiderivative(differentiate(f, 1))
    assert F[0] == 0
    assert np.allclose(F, f - f[0], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(c=coeffs, x=st.floats(0, 1))
def test_evaluate_periodic_interpolates_exactly(c, x):
    u = np.arange(32) / 32
    f, _ = trig_poly(u, c)
    exact, _ = trig_poly(np.array([x]), c)
    assert np.allclose(evaluate_periodic(f, x), exact, atol=1e-12)


def test_resample_is_band_limited_refinement():
    u = np.arange(24) / 24
    f, _ = trig_poly(u, [0.3, -0.2, 0.1, 0.5, -0.4, 0.25])
    fine = resample(f, 96)
    exact, _ = trig_poly(np.arange(96) / 96, [0.3, -0.2, 0.1, 0.5, -0.4, 0.25])
    assert np.allclose(fine, exact, atol=1e-13)


@pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
def test_circle_geometry_analytic(r):
    c = make_curve("circle", 64, r=r)
    g = geometry(c)
    assert abs(g.length - 2 * np.pi * r) < 1e-12 * r
    assert np.max(np.abs(g.speed - 2 * np.pi * r)) < 1e-10
    assert np.max(np.abs(g.ksq - 1 / r**2)) < 1e-10
    assert np.allclose(g.arclen, g.length * c.params, atol=1e-12)
    # curvature vector points to the centre
    assert np.allclose(g.kappa, -c.points / r**2, atol=1e-10)


def test_ellipse_curvature_and_length_against_closed_form():
    a, b = 1.3, 0.7
    c = make_curve("ellipse", 128, a=a, b=b)
    g = geometry(c)
    th = 2 * np.pi * c.params
    k_exact = a * b / (a**2 * np.sin(th) ** 2 + b**2 * np.cos(th) ** 2) ** 1.5
    assert np.max(np.abs(np.sqrt(g.ksq) - k_exact)) < 1e-10
    assert abs(g.length - ELLIPSE_13_07_LENGTH) < 1e-12
    assert np.max(np.abs(np.einsum("ij,ij->i", g.tangent, g.kappa))) < 1e-12


def test_figure_eight_length():
    g = geometry(make_curve("figure_eight", 128))
    assert abs(g.length - GERONO_LENGTH) < 1e-10


def test_spectral_self_convergence_of_curvature():
    # the ellipse is band-limited, so differences sit at roundoff from the start
    for n in (16, 32, 64):
        k_n = geometry(make_curve("ellipse", n)).kappa
        k_2n = geometry(make_curve("ellipse", 2 * n)).kappa[::2]
        assert np.max(np.abs(k_n - k_2n)) < 1e-10

    # a conic section in polar form is not; errors fall geometrically
    def conic(n):
        th = 2 * np.pi * np.arange(n) / n
        r = 1 / (1 + 0.3 * np.cos(th))
        return ClosedCurve(np.column_stack([r * np.cos(th), r * np.sin(th)]))

    errs = []
    for n in (16, 32, 64):
        errs.append(np.max(np.abs(geometry(conic(n)).kappa - geometry(conic(2 * n)).kappa[::2])))
    assert errs[1] < errs[0] / 100 and errs[2] < max(errs[1] / 100, 1e-11)


def test_integrate_ds_invariant_under_cyclic_shift():
    c = make_curve("fourier", 64, seed=2)
    f = np.cos(np.arange(64) / 5.0)
    shifted = ClosedCurve(np.roll(c.points, 7, axis=0))
    assert abs(integrate_ds(c, f) - integrate_ds(shifted, np.roll(f, 7))) < 1e-13


def test_h2ds_inner_bilinear_symmetric_positive():
    rng = np.random.default_rng(4)
    c = make_curve("ellipse", 64)
    v, w, z = (random_field(64, 2, rng) for _ in range(3))
    assert abs(h2ds_inner(c, v, w) - h2ds_inner(c, w, v)) < 1e-12
    lhs = h2ds_inner(c, 2 * v + 3 * z, w)
    assert abs(lhs - 2 * h2ds_inner(c, v, w) - 3 * h2ds_inner(c, z, w)) < 1e-10
    assert h2ds_inner(c, v, v) > 0
    assert h2ds_norm(c, np.zeros((64, 2))) == 0


def test_immersion_floor_is_a_hard_error():
    pts = np.zeros((16, 2))
    with pytest.raises(NonImmersedError):
        geometry(ClosedCurve(pts))


def test_curve_validation():
    with pytest.raises(ValueError):
        ClosedCurve(np.zeros((15, 2)))
    with pytest.raises(ValueError):
        ClosedCurve(np.zeros((8, 2)))
    with pytest.raises(ValueError):
        ClosedCurve(np.full((16, 2), np.nan))
    c = make_curve("circle", 16)
    with pytest.raises(ShapeMismatchError):
        h2ds_inner(c, np.zeros((16, 3)), np.zeros((16, 3)))
    with pytest.raises(ValueError):
        c.points[0, 0] = 1.0


def test_rotation_index_oracles():
    assert rotation_index(make_curve("circle", 64)) == 1
    assert rotation_index(make_curve("circle", 64, p=2)) == 2
    assert rotation_index(make_curve("figure_eight", 64)) == 0
    flipped = ClosedCurve(make_curve("ellipse", 64).points[::-1].copy())
    assert rotation_index(flipped) == -1


def test_fourier_curves_are_seeded_and_immersed():
    a = make_curve("fourier", 128, seed=7)
    b = make_curve("fourier", 128, seed=7)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, make_curve("fourier", 128, seed=8).points)
    g = geometry(a)
    assert g.speed.min() > 0.2 * g.speed.mean()


def test_space_curves_embed_planar_fixtures():
    c = make_curve("ellipse", 64, dim=3)
    assert c.dim == 3 and np.all(c.points[:, 2] == 0)
    assert abs(geometry(c).length - geometry(make_curve("ellipse", 64)).length) < 1e-13
