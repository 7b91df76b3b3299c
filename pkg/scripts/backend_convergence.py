"""Relative H2(ds) gap between the kernel and weak gradients as N grows."""

import math

from h2elastica.curve import h2ds_norm, make_curve
from h2elastica.kernel import h2_gradient_kernel
from h2elastica.weaksolve import h2_gradient_weak

SHAPES = {
    "ellipse": dict(shape="ellipse", a=1.3, b=0.7),
    "figure_eight": dict(shape="figure_eight"),
    "fourier-1": dict(shape="fourier", seed=1),
    "fourier-3": dict(shape="fourier", seed=3),
}


def gap(c, lam=1.0):
    gw, gk = h2_gradient_weak(c, lam), h2_gradient_kernel(c, lam)
    return h2ds_norm(c, gw - gk) / h2ds_norm(c, gw)


def main():
    sizes = (32, 64, 128, 256)
    print(f"{'curve':>14} " + " ".join(f"{'N=' + str(n):>10}" for n in sizes) + "   orders")
    for name, kw in SHAPES.items():
        kw = dict(kw)
        shape = kw.pop("shape")
        gaps = [gap(make_curve(shape, n, **kw)) for n in sizes]
        orders = [math.log2(a / b) for a, b in zip(gaps, gaps[1:]) if a > 1e-9 and b > 0]
        print(f"{name:>14} " + " ".join(f"{g:10.2e}" for g in gaps) + "   " + " ".join(f"{o:.1f}" for o in orders))


if __name__ == "__main__":
    main()
