import warnings

import pytest
from hypothesis import HealthCheck, settings

from ductmodes import BoundarySpec, enumerate_eps, find_modes, solve_junction

settings.register_profile(
    "ductmodes",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ductmodes")

K = 30.0
DISSIPATIVE_BETA = 0.4 + 0.2j
CASE1_IMPEDANCE = 0.1 - 1.0j
CASE2_BETA = 0.0993 + 0.0427j

# filled by the acceptance module, printed at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def ep1():
    return enumerate_eps(0, K, 1)[0]


@pytest.fixture(scope="session")
def dissipative_modes():
    return find_modes(BoundarySpec(K, 0, DISSIPATIVE_BETA), 30)


@pytest.fixture(scope="session")
def case1_solution():
    return solve_junction(BoundarySpec.from_impedance(K, 0, CASE1_IMPEDANCE), N=50)


@pytest.fixture(scope="session")
def case2_solution():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return solve_junction(BoundarySpec(K, 0, CASE2_BETA), N=50)
