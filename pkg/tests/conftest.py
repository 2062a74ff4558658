import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from collabsim.scenario import WorldConfig

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def small_world():
    return WorldConfig(grid_height=24, grid_width=32, num_agents=2, num_objects=4, duration=6, seed=3,
                       sensing_range=8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []  # one "PASS/FAIL criterion N ..." line per checked criterion


@pytest.fixture
def report():
    def check(number, name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({name}): {detail}"
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
