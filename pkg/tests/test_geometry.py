import numpy as np
import pytest

from spikelab.errors import PreconditionError, ProjectionError
from spikelab.geometry import (
    ball,
    curvature_at,
    ellipsoid,
    implicit,
    local_graph,
    project_to_boundary,
    sample_boundary,
    tangent_step,
)


@pytest.mark.parametrize("radius", [0.5, 1.0, 3.0])
def test_ball_curvatures_exact(radius):
    domain = ball([0.1, -0.2, 0.3], radius)
    for q in sample_boundary(domain, 50, seed=1):
        assert np.allclose(q.curvatures, 1.0 / radius, atol=1e-10)
        assert q.mean_curvature == pytest.approx(1.0 / radius, abs=1e-10)
        assert np.linalg.norm(q.point - domain.center) == pytest.approx(radius, abs=1e-12)
        assert np.allclose(q.normal, (q.point - domain.center) / radius, atol=1e-10)


def test_frame_is_orthonormal_and_tangent(unit_ball):
    q = project_to_boundary(unit_ball, [0.3, 0.4, 2.0])
    assert q.frame.shape == (2, 3)
    assert np.allclose(q.frame @ q.frame.T, np.eye(2), atol=1e-12)
    assert np.allclose(q.frame @ q.normal, 0.0, atol=1e-12)


def test_oblate_ellipsoid_pole_matches_local_graph():
    domain = ellipsoid([2.0, 2.0, 1.0])
    q = project_to_boundary(domain, [0.0, 0.0, 1.5])
    assert np.allclose(q.point, [0.0, 0.0, 1.0], atol=1e-12)
    assert q.mean_curvature == pytest.approx(0.25, abs=1e-6)

    # quadratic fit of the boundary graph over the tangent plane
    h = 1e-3
    offsets = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
    _, heights = local_graph(domain, q, offsets)
    second = np.array([heights[0] + heights[1], heights[2] + heights[3]]) / h**2
    assert np.allclose(np.sort(second), q.curvatures, atol=1e-6)
    assert 0.5 * second.sum() == pytest.approx(0.25, abs=1e-6)


def test_prolate_ellipsoid_pole_curvature():
    domain = ellipsoid([1.0, 1.0, 2.0])
    q = project_to_boundary(domain, [0.0, 0.0, -3.0])
    assert np.allclose(q.point, [0.0, 0.0, -2.0], atol=1e-12)
    assert q.mean_curvature == pytest.approx(2.0, abs=1e-8)


def test_implicit_domain_matches_ball():
    domain = implicit("x1^2 + x2^2 - 4", [[-3.0, -3.0], [3.0, 3.0]])
    q = project_to_boundary(domain, [1.0, 1.0])
    assert np.linalg.norm(q.point) == pytest.approx(2.0, abs=1e-12)
    assert q.mean_curvature == pytest.approx(0.5, abs=1e-10)


def test_projection_requires_regular_gradient(unit_ball):
    with pytest.raises(ProjectionError):
        project_to_boundary(unit_ball, [0.0, 0.0, 0.0])


def test_projection_checks_dimension(unit_ball):
    with pytest.raises(PreconditionError):
        project_to_boundary(unit_ball, [1.0, 0.0])


def test_center_must_be_inside():
    with pytest.raises(PreconditionError, match="not inside"):
        implicit("x1^2 + x2^2 - 1", [[-2.0, -2.0], [2.0, 2.0]], center=[1.5, 0.0])


def test_tangent_step_stays_on_boundary(unit_ball):
    q = project_to_boundary(unit_ball, [0.0, 0.0, 1.0])
    assert tangent_step(unit_ball, q, q.frame[0], 0.0) is q
    moved = tangent_step(unit_ball, q, q.frame[0], 0.1)
    assert np.linalg.norm(moved.point) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(moved.point - q.point) > 0.09


def test_sample_is_deterministic_and_spread(unit_ball):
    first = np.array([q.point for q in sample_boundary(unit_ball, 200, seed=7)])
    second = np.array([q.point for q in sample_boundary(unit_ball, 200, seed=7)])
    assert np.array_equal(first, second)
    # every octant is hit
    octants = {tuple(np.sign(p)) for p in first}
    assert len(octants) == 8


def test_one_dimensional_interval():
    domain = ball([0.0], 1.0)
    points = sorted(float(q.point[0]) for q in sample_boundary(domain, 2))
    assert points == pytest.approx([-1.0, 1.0])
    q = curvature_at(domain, [1.0])
    assert q.mean_curvature == 0.0 and q.frame.shape == (0, 1)


EVEN_MONOMIALS = [(2, 0), (1, 1), (0, 2), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]


@pytest.mark.parametrize("semi_axes", [[1.0, 1.0, 2.0], [2.0, 1.5, 1.0]])
def test_curvatures_match_local_graph_fit(semi_axes):
    domain = ellipsoid(semi_axes)
    h = 1e-2
    grid = h * np.array([(i, j) for i in range(-2, 3) for j in range(-2, 3) if i or j], dtype=float)
    design = np.stack([grid[:, 0] ** a * grid[:, 1] ** b for a, b in EVEN_MONOMIALS], axis=1)
    for q in sample_boundary(domain, 20, seed=12):
        _, heights = local_graph(domain, q, grid)
        # odd monomials are orthogonal to even ones on a symmetric stencil
        coef = np.linalg.lstsq(design, heights, rcond=None)[0]
        assert 2.0 * coef[0] == pytest.approx(q.curvatures[0], abs=1e-6)
        assert 2.0 * coef[2] == pytest.approx(q.curvatures[1], abs=1e-6)
        assert abs(coef[1]) <= 1e-6
