import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from robinshunt import GeometryConfig, assemble, build_geometry, generate_mesh

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

A, B = 1.0, 3.0


@functools.lru_cache(maxsize=None)
def make_system(n=2, m=4, refinement=1):
    """(mesh, system) with default geometry; memoised across tests."""
    geometry = build_geometry(GeometryConfig(n=n, m=m))
    mesh = generate_mesh(geometry, refinement)
    return mesh, assemble(mesh, geometry)


@pytest.fixture(scope="session")
def coarse():
    """(mesh, system) for n=2, m=4 at refinement 1 (D = 143)."""
    return make_system(2, 4)


@pytest.fixture(scope="session")
def sys2(coarse):
    return coarse[1]


@pytest.fixture(scope="session")
def sys3():
    return make_system(3, 6)[1]


@pytest.fixture(scope="session")
def sys4():
    return make_system(4, 8)[1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
