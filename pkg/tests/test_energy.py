import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ELLIPSE_13_07_BENDING, ELLIPSE_13_07_LENGTH, GERONO_BENDING, random_field
from h2elastica.curve import ClosedCurve, geometry, integrate_ds, make_curve
from h2elastica.energy import (
    EnergyParams,
    bending_energy,
    el_residual,
    energy,
    first_variation,
    j_functional,
    j_variation,
    l2_gradient,
    second_variation,
)
from h2elastica.reparam import project_arclength


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.2, 5.0), lam=st.floats(0.1, 3.0))
def test_circle_energy_closed_form(r, lam):
    c = make_curve("circle", 64, r=r)
    assert abs(energy(c, lam) - (2 * np.pi / r + lam**2 * 2 * np.pi * r)) < 1e-10 * (1 / r + r)


def test_ellipse_and_figure_eight_energy_against_quadrature():
    e = make_curve("ellipse", 128, a=1.3, b=0.7)
    assert abs(bending_energy(e) - ELLIPSE_13_07_BENDING) < 1e-10
    assert abs(energy(e, 0.5) - (ELLIPSE_13_07_BENDING + 0.25 * ELLIPSE_13_07_LENGTH)) < 1e-10
    assert abs(bending_energy(make_curve("figure_eight", 256)) - GERONO_BENDING) < 1e-8


def test_params_validation():
    with pytest.raises(ValueError):
        EnergyParams(0.0)
    with pytest.raises(ValueError):
        EnergyParams(float("nan"))
    with pytest.raises(TypeError):
        energy(make_curve("circle", 16), "one")
    # only lambda^2 enters
    c = make_curve("ellipse", 32)
    assert energy(c, -1.5) == energy(c, 1.5)


def _fd_ratio(f, eps=1e-2):
    errs = [abs(f(eps / 2**i)) for i in range(3)]
    return errs[0] / errs[1], errs[1] / errs[2]


@pytest.mark.parametrize("shape", ["ellipse", "figure_eight", "fourier"])
def test_first_variation_central_difference_is_second_order(shape):
    rng = np.random.default_rng(11)
    c = make_curve(shape, 64)
    v = random_field(64, 2, rng) * 0.1
    d = first_variation(c, 1.0, v)

    def err(eps):
        return (energy(c + eps * v, 1.0) - energy(c - eps * v, 1.0)) / (2 * eps) - d

    r1, r2 = _fd_ratio(err)
    assert 3.5 < r1 < 4.5 and 3.5 < r2 < 4.5


def test_j_variation_central_difference_is_second_order():
    rng = np.random.default_rng(12)
    c = make_curve("fourier", 64, seed=1)
    v = random_field(64, 2, rng) * 0.1
    d = j_variation(c, 0.8, v)

    def err(eps):
        return (j_functional(c + eps * v, 0.8) - j_functional(c - eps * v, 0.8)) / (2 * eps) - d

    r1, r2 = _fd_ratio(err)
    assert 3.5 < r1 < 4.5 and 3.5 < r2 < 4.5


def test_second_variation_symmetric_and_matches_differenced_first_variation():
    rng = np.random.default_rng(13)
    c = make_curve("ellipse", 64)
    V, W = random_field(64, 2, rng) * 0.1, random_field(64, 2, rng) * 0.1
    h = second_variation(c, 1.0, V, W)
    assert abs(h - second_variation(c, 1.0, W, V)) < 1e-10

    def err(eps):
        fd = (first_variation(c + eps * W, 1.0, V) - first_variation(c - eps * W, 1.0, V)) / (2 * eps)
        return fd - h

    r1, r2 = _fd_ratio(err)
    assert 3.5 < r1 < 4.5 and 3.5 < r2 < 4.5


def test_l2_gradient_represents_first_variation():
    rng = np.random.default_rng(14)
    c = make_curve("fourier", 128, seed=3)
    g = l2_gradient(c, 1.2)
    for _ in range(5):
        v = random_field(128, 2, rng)
        pairing = integrate_ds(c, np.einsum("ij,ij->i", g, v))
        assert abs(pairing - first_variation(c, 1.2, v)) < 1e-9 * max(1.0, abs(pairing))


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_circles_of_radius_inverse_lambda_are_stationary(lam):
    c = make_curve("circle", 256, r=1 / lam)
    field, norm = el_residual(c, lam)
    assert norm < 1e-6
    assert np.allclose(field, l2_gradient(c, lam), atol=1e-6)
    # any other radius is not
    assert el_residual(make_curve("circle", 256, r=2 / lam), lam)[1] > 0.1


def test_j_agrees_with_energy_on_constant_speed_curves():
    for shape in ("ellipse", "fourier"):
        p = project_arclength(make_curve(shape, 256))
        assert abs(j_functional(p, 0.7) - energy(p, 0.7)) < 1e-10
    # and differs off the constraint set
    e = make_curve("ellipse", 64)
    assert abs(j_functional(e, 1.0) - energy(e, 1.0)) > 1e-2


def test_energy_invariant_under_rigid_motion():
    c = make_curve("fourier", 64, seed=4)
    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    moved = ClosedCurve(c.points @ R.T + np.array([3.0, -1.0]))
    assert abs(energy(moved, 1.0) - energy(c, 1.0)) < 1e-11
    # scaling: bending part scales as 1/s, length part as s
    s = 1.7
    big = c.scaled(s)
    assert abs(bending_energy(big) - bending_energy(c) / s) < 1e-11
    assert abs(geometry(big).length - s * geometry(c).length) < 1e-12
