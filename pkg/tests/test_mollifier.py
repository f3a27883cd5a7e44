"""Bump kernel: normalization and derivative-mass oracles (frozen from
independent mpmath / adaptive-quadrature runs), discrete mollification laws.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from ellreg import mollifier as mo
from ellreg.grid import Grid2, GridFunction

from conftest import philox, random_field

# frozen oracle values (mpmath, 40 digits):
#   int_{-1}^{1} exp(1/(x^2-1)) dx        = 0.44399381616807943782
#   disk integral 2*pi*int r exp(..) dr   = 0.46651239317833006888
#   int |eta'''| / C (n=1)                = 35.64722425130783
#   n=2 |D^(3,0)| mass / C = 42.493506801927815, |D^(2,1)| / C = 20.664117821842147
NORM_1D = 2.2522836210435810105
NORM_2D = 2.1435657757922366
K2_1D = 80.28765931688816
K2_2D = 91.08762687400709


def test_normalize_frozen_values():
    assert mo.normalize(1) == pytest.approx(NORM_1D, rel=1e-9)
    assert mo.normalize(2) == pytest.approx(NORM_2D, rel=1e-9)
    with pytest.raises(ValueError):
        mo.normalize(3)


def test_scaled_kernel_has_unit_mass():
    for gamma in (0.05, 0.1, 0.19):
        k1 = mo.BumpKernel.build(1, gamma)
        total, _ = integrate.quad(lambda x: float(k1(np.array(x))), -gamma, gamma, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)
    k2 = mo.BumpKernel.build(2, 0.1)
    total, _ = integrate.quad(lambda r: 2 * math.pi * r * float(k2(np.array(r), np.array(0.0))),
                              0, 0.1, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_third_derivative_mass_frozen_values():
    assert mo.third_derivative_mass(1) == pytest.approx(K2_1D, rel=1e-6)
    assert mo.third_derivative_mass(2) == pytest.approx(K2_2D, rel=1e-5)


def test_third_derivative_mass_scales_with_c_prime():
    base = mo.third_derivative_mass(1, c_prime=1.0)
    assert mo.third_derivative_mass(1, c_prime=2.0) == pytest.approx(2.0 * base, rel=1e-12)


def test_third_derivative_magnitude_even_symmetric():
    xs = np.linspace(0.05, 0.95, 40)
    assert np.allclose(np.abs(mo._third_deriv_1d(xs)), np.abs(mo._third_deriv_1d(-xs)),
                       rtol=1e-12, atol=0.0)


# ---------------------------------------------------------------------------
# discrete kernel and mollification


def test_discrete_kernel_mass_exactly_one():
    for N, mult in ((65, 4.0), (129, 4.0), (201, 10.0)):
        g = Grid2.disk(N)
        _, w = mo.discrete_kernel(g.h, mult * g.h)
        assert math.fsum(w) == 1.0
        assert (w > 0).all()


def test_discrete_kernel_under_resolved():
    g = Grid2.disk(17)
    with pytest.raises(ValueError, match="under-resolved"):
        mo.discrete_kernel(g.h, 1.5 * g.h)


def test_mollify_constant_and_linear_fixed_points():
    g = Grid2.disk(65)
    const = GridFunction.from_callable(g, lambda x, y: np.full_like(x, 5.0))
    mc = mo.mollify(const, 4 * g.h)
    assert np.max(np.abs(mc.values[mc.defined] - 5.0)) <= 1e-13
    lin = GridFunction.from_callable(g, lambda x, y: 0.25 + 2.0 * x - 1.5 * y)
    ml = mo.mollify(lin, 4 * g.h)
    assert np.max(np.abs(ml.values[ml.defined] - lin.values[ml.defined])) <= 1e-12


def test_mollify_commutes_with_linear_addition():
    g = Grid2.disk(65)
    rng = philox(7)
    u = random_field(g, rng)
    lin = GridFunction.from_callable(g, lambda x, y: 0.3 - 1.1 * x + 0.8 * y)
    combo = GridFunction(g, u.values + lin.values, g.defined.copy())
    left = mo.mollify(combo, 4 * g.h)
    right = mo.mollify(u, 4 * g.h)
    m = left.defined
    assert np.max(np.abs(left.values[m] - (right.values[m] + lin.values[m]))) <= 1e-12


def test_mollify_never_grows_sup_norm():
    g = Grid2.disk(65)
    rng = philox(42)
    for _ in range(50):
        u = random_field(g, rng)
        m = mo.mollify(u, 4 * g.h)
        assert m.sup() <= u.sup()


def test_mollify_shrinks_domain_and_validates():
    g = Grid2.disk(65)
    u = GridFunction.from_callable(g, lambda x, y: x)
    out = mo.mollify(u, 4 * g.h)
    assert out.defined.sum() < u.defined.sum()
    rr = np.hypot(g.X, g.Y)
    assert not out.defined[rr > 1.0 - 2 * g.h].any()
    with pytest.raises(ValueError, match="under-resolved"):
        mo.mollify(u, 1.2 * g.h)
    with pytest.raises(ValueError, match="gamma must lie"):
        mo.mollify(u, 0.5)
    ring = g.defined & (rr >= 0.9)
    thin = GridFunction.from_callable(g, lambda x, y: x, mask=ring)
    with pytest.raises(ValueError, match="domain too small"):
        mo.mollify(thin, 0.19)


def test_mollify_holder_rate_sqrt_profile():
    # |x|^(1/2) has Hoelder-1/2 seminorm exactly 1, so the discrete kernel
    # bound gives ||u_gamma - u||_inf <= gamma^(1/2) outright; allow the
    # documented lattice slack on top.
    g = Grid2.disk(201)
    u = GridFunction.from_callable(g, lambda x, y: np.hypot(x, y) ** 0.5)
    gamma = 0.1
    m = mo.mollify(u, gamma)
    dev = float(np.max(np.abs(m.values[m.defined] - u.values[m.defined])))
    assert dev <= gamma**0.5 + 2.0 * g.h
    assert dev > 0.01 * gamma**0.5
