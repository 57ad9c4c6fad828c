import numpy as np
import pytest

from liebridge.control import build_solution
from liebridge.geometry import make_grid, uniform_density, von_mises_so2, von_mises_so3_class
from liebridge.sinkhorn import BridgeProblem, solve

THETA00 = np.pi / 6
THETA01 = 11 * np.pi / 6


def so2_preset_problem(n=512, sigma=1.0):
    grid = make_grid("so2", n)
    return BridgeProblem(grid, von_mises_so2(grid, 40.0, THETA00), von_mises_so2(grid, 40.0, THETA01), sigma)


def so3_preset_problem(m=400):
    grid = make_grid("so3", m)
    return BridgeProblem(grid, von_mises_so3_class(grid, 30.0, 1.0), von_mises_so3_class(grid, 30.0, 2.0), 0.5, 60)


@pytest.fixture(scope="session")
def so2_problem():
    return so2_preset_problem()


@pytest.fixture(scope="session")
def so2_solved(so2_problem):
    return solve(so2_problem)


@pytest.fixture(scope="session")
def so2_solution(so2_problem, so2_solved):
    return build_solution(so2_problem, so2_solved[0])


@pytest.fixture(scope="session")
def so3_problem():
    return so3_preset_problem()


@pytest.fixture(scope="session")
def so3_solved(so3_problem):
    return solve(so3_problem)


@pytest.fixture(scope="session")
def so3_solution(so3_problem, so3_solved):
    return build_solution(so3_problem, so3_solved[0])


@pytest.fixture(params=["so2", "so3"])
def uniform_problem(request):
    grid = make_grid(request.param, 64)
    return BridgeProblem(grid, uniform_density(grid), uniform_density(grid), 0.7)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
