import os
import sys


ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)


import pytest

from spikelab.auxiliary import build_problem
from spikelab.geometry import ball
from spikelab.groundstate import solve_ground_state


@pytest.fixture(scope="session")
def profile_1d():
    return solve_ground_state(1, 3.0)


@pytest.fixture(scope="session")
def profile_3d():
    return solve_ground_state(3, 3.0)


@pytest.fixture(scope="session")
def unit_ball():
    return ball([0.0, 0.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def ball_problem(unit_ball, profile_3d):
    """Unit ball in R^3, p = 3, J = V = 1."""
    return build_problem(3, 3.0, unit_ball, assumption_samples=2000, profile=profile_3d)


@pytest.fixture(scope="session")
def ball_problem_v(unit_ball, profile_3d):
    """Unit ball in R^3, p = 3, J = 1, V = 1 + x1^2."""
    return build_problem(
        3, 3.0, unit_ball, "1", "1+x1^2", assumption_samples=2000, profile=profile_3d
    )
