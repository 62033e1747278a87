import math

import numpy as np
import pytest

from spikelab.errors import PreconditionError
from spikelab.scaled_state import (
    Moment,
    ScaledGroundState,
    halfspace_normal_weight,
    sphere_area,
)

NORMAL = np.array([0.0, 0.0, 1.0])


def gauss_panels(lo, hi, panels, order=6):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    nodes = (edges[:-1] + half)[:, None] + half[:, None] * x
    return nodes.ravel(), (half[:, None] * w).ravel()


def state(profile, j=1.0, v=1.0):
    return ScaledGroundState(profile, NORMAL, NORMAL, j, v)


def test_sphere_constants():
    assert sphere_area(-1) == 0.0
    assert sphere_area(0) == pytest.approx(2.0)
    assert sphere_area(1) == pytest.approx(2.0 * math.pi)
    assert sphere_area(2) == pytest.approx(4.0 * math.pi)
    assert halfspace_normal_weight(2) == pytest.approx(-2.0)
    assert halfspace_normal_weight(3) == pytest.approx(-math.pi)


def test_rejects_nonpositive_coefficients(profile_3d):
    with pytest.raises(PreconditionError):
        state(profile_3d, j=0.0)
    with pytest.raises(PreconditionError):
        state(profile_3d, v=-1.0)


def test_scaling_law_for_power_integral(profile_3d):
    rng = np.random.default_rng(11)
    p, n = 3.0, 3
    unit = state(profile_3d).halfspace_power_integral(p + 1.0)
    for j, v in rng.uniform(0.2, 5.0, size=(20, 2)):
        scaled = state(profile_3d, j, v).halfspace_power_integral(p + 1.0)
        expected = v ** ((p + 1.0) / (p - 1.0) - 0.5 * n) * j ** (0.5 * n) * unit
        assert scaled == pytest.approx(expected, rel=1e-8)


def test_evaluate_and_gradient(profile_3d):
    s = state(profile_3d, 2.0, 3.0)
    x = np.array([0.3, -0.4, 1.2])
    r = np.linalg.norm(x)
    assert s.evaluate(x) == pytest.approx(s.alpha * profile_3d.eval(s.beta * r))
    h = 1e-6
    fd = np.array([(s.evaluate(x + h * e) - s.evaluate(x - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(s.gradient(x), fd, rtol=1e-6, atol=1e-9)
    assert np.allclose(s.gradient(np.zeros(3)), 0.0)


@pytest.mark.parametrize("integrand", [Moment.U_SQ, Moment.GRAD_SQ])
def test_normal_moments_match_cylindrical_quadrature(profile_3d, integrand):
    # ∫_{z<0} z g dx with g radial, done in (ρ, z) with the 2πρ weight
    s = state(profile_3d, 1.5, 2.0)
    z, wz = gauss_panels(-25.0, 0.0, 250)
    rho, wr = gauss_panels(0.0, 25.0, 250)
    r = np.hypot(rho[None, :], z[:, None])
    if integrand is Moment.U_SQ:
        g = (s.alpha * profile_3d.eval(s.beta * r)) ** 2
    else:
        g = (s.alpha * s.beta * profile_3d.eval_deriv(s.beta * r)) ** 2
    direct = np.sum(wz[:, None] * wr[None, :] * z[:, None] * g * 2.0 * math.pi * rho[None, :])
    assert s.normal_moment(integrand) == pytest.approx(direct, rel=1e-4)
    assert s.normal_moment(integrand) < 0.0


def test_first_moment_projects_on_normal(profile_3d):
    s = state(profile_3d)
    assert s.halfspace_first_moment(NORMAL, Moment.U_SQ) == s.normal_moment(Moment.U_SQ)
    assert s.halfspace_first_moment([1.0, 0.0, 0.0], Moment.GRAD_SQ) == 0.0
    with pytest.raises(PreconditionError):
        s.halfspace_first_moment([1.0, 1.0, 0.0], Moment.U_SQ)


def test_trace_moments_match_planar_quadrature(profile_3d):
    s = state(profile_3d, 0.7, 1.9)
    a, wa = gauss_panels(-25.0, 25.0, 400)
    r2 = a[:, None] ** 2 + a[None, :] ** 2
    trace = s.alpha * profile_3d.eval(s.beta * np.sqrt(r2))
    weights = wa[:, None] * wa[None, :]
    a_bar = 0.5 * np.sum(weights * trace ** 4 * r2)
    b_bar = 0.5 * np.sum(weights * trace ** 2)
    got_a, got_b = s.boundary_trace_moments()
    assert got_a == pytest.approx(a_bar, rel=1e-6)
    assert got_b == pytest.approx(b_bar, rel=1e-6)
    assert got_a > 0.0 and got_b > 0.0


def test_one_dimensional_trace_is_empty(profile_1d):
    s = ScaledGroundState(profile_1d, [1.0], [1.0], 1.0, 1.0)
    assert s.boundary_trace_moments() == (0.0, 0.0)


def test_limit_energy(profile_3d):
    s = state(profile_3d)
    assert s.limit_energy() == pytest.approx(0.25 * s.halfspace_power_integral(4.0))
    with pytest.raises(PreconditionError):
        s.halfspace_power_integral(1.0)
