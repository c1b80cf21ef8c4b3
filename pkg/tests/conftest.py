import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from covsurf.generate import base_for, random_configuration, standard_special_set, unit_disk_cap
from covsurf.triangulate import shelling_order

settings.register_profile(
    "repo", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def z2_setup():
    E = standard_special_set()
    cap = unit_disk_cap()
    return E, cap, base_for(E, cap, 2)


@pytest.fixture(scope="session")
def closed_base():
    E = standard_special_set()
    return E, base_for(E, None, 0)


@pytest.fixture(scope="session")
def configs():
    """A handful of random (E, cap, base, shelling) tuples reused across tests."""
    out = []
    rng = np.random.default_rng(2024)
    for q, m in [(3, 2), (3, 3), (4, 2), (5, 1), (4, 4)]:
        E, cap = random_configuration(rng, q)
        B = base_for(E, cap, m)
        out.append((E, cap, B, shelling_order(B)))
    return out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
