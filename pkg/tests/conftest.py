import numpy as np
import pytest

from h2elastica.curve import make_curve
from h2elastica.flow import FlowConfig, run_flow

# Reference values from 30-digit adaptive quadrature of the analytic integrands.
ELLIPSE_13_07_LENGTH = 6.42537074283892573654979401085
ELLIPSE_13_07_BENDING = 9.13259919901778593907322170606
GERONO_LENGTH = 6.09722347010491604643037420567
GERONO_BENDING = 26.5841429429093445538853192267


def fixture_family(n, dim=2):
    """Non-stationary test curves: three circles, three ellipses, a figure-eight, five random curves."""
    family = {f"circle-r{r}": make_curve("circle", n, dim, r=r) for r in (0.5, 1.5, 2.0)}
    for a, b in ((1.3, 0.7), (1.5, 0.5), (1.1, 0.9)):
        family[f"ellipse-{a}-{b}"] = make_curve("ellipse", n, dim, a=a, b=b)
    family["figure-eight"] = make_curve("figure_eight", n, dim)
    for seed in range(5):
        family[f"fourier-{seed}"] = make_curve("fourier", n, dim, seed=seed)
    return family


def random_field(n, dim, rng, kmax=8, decay=2.0):
    """Smooth random periodic vector field with algebraically decaying modes."""
    u = np.arange(n) / n
    v = np.zeros((n, dim))
    for k in range(kmax + 1):
        amp = 1.0 / (1.0 + k) ** decay
        v += np.outer(np.cos(2 * np.pi * k * u), rng.normal(scale=amp, size=dim))
        if k:
            v += np.outer(np.sin(2 * np.pi * k * u), rng.normal(scale=amp, size=dim))
    return v


@pytest.fixture(scope="session")
def ellipse_run():
    curve = make_curve("ellipse", 128, a=1.3, b=0.7)
    config = FlowConfig(lam=1.0, backend="weak", integrator="adaptive", stop_grad_tol=1e-6)
    return curve, config, run_flow(curve, config)
