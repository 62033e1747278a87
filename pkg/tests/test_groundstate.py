import json
import math

import numpy as np
import pytest

from spikelab.errors import PreconditionError, ResidualError, SubcriticalityError
from spikelab.groundstate import (
    RadialProfile,
    ShotKind,
    critical_exponent,
    load_profile,
    nehari_residual,
    pohozaev_residual,
    profile_summary,
    save_profile,
    shoot,
    solve_ground_state,
    unit_sphere_area,
)


def soliton(r, p):
    """Closed-form ground state on the line."""
    amplitude = (0.5 * (p + 1.0)) ** (1.0 / (p - 1.0))
    return amplitude / np.cosh(0.5 * (p - 1.0) * r) ** (2.0 / (p - 1.0))


def test_sphere_areas():
    assert unit_sphere_area(1) == pytest.approx(2.0)
    assert unit_sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert unit_sphere_area(3) == pytest.approx(4.0 * math.pi)


def test_critical_exponent():
    assert critical_exponent(3) == pytest.approx(5.0)
    assert critical_exponent(2) == math.inf


@pytest.mark.parametrize("exponent", [5.0, 6.0, 1.0, 0.5])
def test_rejects_non_subcritical(exponent):
    with pytest.raises(SubcriticalityError, match="p must"):
        solve_ground_state(3, exponent)


def test_rejects_bad_dimension():
    with pytest.raises(PreconditionError):
        solve_ground_state(0, 2.0)


@pytest.mark.parametrize("exponent", [2.0, 3.0])
def test_one_dimensional_soliton(exponent):
    profile = solve_ground_state(1, exponent)
    assert profile.alpha == pytest.approx((0.5 * (exponent + 1.0)) ** (1.0 / (exponent - 1.0)), abs=1e-8)
    r = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
    assert np.allclose(profile.eval(r), soliton(r, exponent), rtol=1e-6, atol=1e-12)


def rk4_alpha(dimension, exponent, lo, hi, step=1e-3, r_max=16.0, width=64, rounds=7):
    """Fixed-step RK4 multisection on u(0), all candidates integrated side by side."""
    bend = dimension - 1.0

    def rhs(r, u, du):
        return du, u - np.abs(u) ** (exponent - 1.0) * u - bend / r * du

    for _ in range(rounds):
        alpha = np.linspace(lo, hi, width)
        c = (alpha - alpha**exponent) / (2.0 * dimension)
        u, du = alpha + c * step**2, 2.0 * c * step
        fate = np.zeros(width)
        r = step
        with np.errstate(all="ignore"):
            while r < r_max and np.any(fate == 0.0):
                k1 = rhs(r, u, du)
                k2 = rhs(r + step / 2, u + step / 2 * k1[0], du + step / 2 * k1[1])
                k3 = rhs(r + step / 2, u + step / 2 * k2[0], du + step / 2 * k2[1])
                k4 = rhs(r + step, u + step * k3[0], du + step * k3[1])
                u = u + step / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                du = du + step / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
                r += step
                fate = np.where((fate == 0.0) & (u < 0.0), 1.0, fate)
                fate = np.where((fate == 0.0) & (du > 0.0), -1.0, fate)
        first = int(np.argmax(fate > 0.0))
        lo, hi = alpha[first - 1], alpha[first]
    return 0.5 * (lo + hi)


def test_three_dimensional_cubic_peak(profile_3d):
    assert profile_3d.alpha == pytest.approx(4.3374, abs=1e-3)
    assert profile_3d.alpha == pytest.approx(rk4_alpha(3, 3.0, 4.0, 5.0), abs=1e-8)


def test_decayed_shot_is_the_sech_soliton():
    outcome = shoot(1, 3.0, math.sqrt(2.0), 40.0)
    assert outcome.kind is ShotKind.DECAYED
    profile = outcome.profile
    r = profile.radii[profile.radii <= 20.0]
    exact = math.sqrt(2.0) / np.cosh(r)
    assert np.max(np.abs(profile.values[: r.size] - exact)) <= 1e-8


MATRIX = [
    (1, 2.0), (1, 3.0),
    (2, 2.0), (2, 3.0),
    (3, 2.0), (3, 3.0), (3, 4.5),
    (4, 2.0), (4, 2.5),
    (5, 2.0), (5, 11.0 / 6.0),
    (5, 1.5),
]


@pytest.mark.parametrize("dimension,exponent", MATRIX)
def test_identities_hold(dimension, exponent):
    tol = 1e-10
    profile = solve_ground_state(dimension, exponent, tol)
    power = profile_summary(profile)["power_integral"]
    assert abs(nehari_residual(profile)) <= 10.0 * tol * max(1.0, power)
    assert abs(nehari_residual(profile)) <= 1e-6
    assert abs(pohozaev_residual(profile)) <= 1e-6


def test_perturbed_profile_breaks_nehari(profile_3d):
    scaled = RadialProfile(
        dimension=3,
        exponent=3.0,
        radii=profile_3d.radii,
        values=1.01 * profile_3d.values,
        derivatives=1.01 * profile_3d.derivatives,
        c_tail=1.01 * profile_3d.c_tail,
        tolerance=profile_3d.tolerance,
    )
    assert abs(nehari_residual(scaled)) > 1e-3
    assert nehari_residual(scaled) < 0.0


def test_unreachable_nehari_target_raises():
    with pytest.raises(ResidualError, match="Nehari residual"):
        solve_ground_state(3, 3.0, 1e-30)


def test_moments_stable_under_grid_refinement(profile_3d):
    finer = solve_ground_state(3, 3.0, n_grid=8000)
    for power_u, power_du, k in [(2.0, 0, 0), (4.0, 0, 0), (0.0, 2, 0), (2.0, 0, 2), (3.0, 0, 1)]:
        coarse = profile_3d.radial_moment(power_u, power_du, k)
        fine = finer.radial_moment(power_u, power_du, k)
        assert fine == pytest.approx(coarse, rel=1e-7)


def test_profile_is_positive_and_decreasing(profile_3d):
    r = np.linspace(0.0, 60.0, 601)
    u = profile_3d.eval(r)
    assert np.all(u > 0.0)
    assert np.all(np.diff(u) < 0.0)
    assert profile_3d.eval_deriv(0.0) == pytest.approx(0.0, abs=1e-12)


def test_tail_model_beyond_grid(profile_3d):
    r = profile_3d.r_max + 5.0
    expected = profile_3d.c_tail * r ** (-1.0) * math.exp(-r)
    assert profile_3d.eval(r) == pytest.approx(expected, rel=1e-12)


def test_shot_classification():
    assert shoot(3, 3.0, 10.0, 80.0).kind is ShotKind.CROSS
    assert shoot(3, 3.0, 2.0, 80.0).kind is ShotKind.REBOUND
    # alpha^(p-1) <= 1 never decreases
    below = shoot(3, 3.0, 0.5, 80.0)
    assert below.kind is ShotKind.REBOUND and below.radius == 0.0


def test_radial_moment_matches_soliton_integrals(profile_1d):
    # on the line with p = 3: u = sqrt(2) sech(r)
    assert profile_1d.radial_moment(2.0) == pytest.approx(2.0, rel=1e-8)
    assert profile_1d.radial_moment(4.0) == pytest.approx(8.0 / 3.0, rel=1e-8)


def test_radial_moment_preconditions(profile_3d):
    with pytest.raises(PreconditionError):
        profile_3d.radial_moment(0.0, 0)
    with pytest.raises(PreconditionError):
        profile_3d.radial_moment(1.0, 1)
    with pytest.raises(PreconditionError):
        profile_3d.radial_moment(2.0, 0, -3)
    with pytest.raises(PreconditionError):
        profile_3d.radial_moment(-1.0)


def test_radial_moment_lower_limit(profile_3d):
    full = profile_3d.radial_moment(2.0)
    assert profile_3d.radial_moment(2.0, r_min=0.0) == full
    assert 0.0 < profile_3d.radial_moment(2.0, r_min=5.0) < 5e-3 * full


def test_summary_reports_integrals(profile_3d):
    summary = profile_summary(profile_3d)
    assert summary["alpha"] == profile_3d.alpha
    assert summary["power_integral"] == pytest.approx(
        summary["grad_sq_integral"] + summary["mass_integral"], rel=1e-6
    )


def test_save_and_load_profile(tmp_path, profile_1d):
    csv_path, json_path = save_profile(profile_1d, tmp_path / "profile", config_hash="abc123")
    assert csv_path.read_text().startswith("# config_sha256=abc123\nr,u,du\n")
    header = json.loads(json_path.read_text())
    assert header["config_sha256"] == "abc123"
    assert header["columns"] == ["r", "u", "du"]

    loaded = load_profile(tmp_path / "profile")
    assert loaded.alpha == profile_1d.alpha
    assert np.array_equal(loaded.values, profile_1d.values)
    assert loaded.c_tail == profile_1d.c_tail
