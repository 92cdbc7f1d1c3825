import math

import numpy as np
import pytest

from hypwalk import polygon as pg


@pytest.fixture(scope="session")
def octagon():
    """Regular genus-2 octagon (m = 4, k = 2)."""
    return pg.build(pg.PolygonSpec.uniform(4, 2))


@pytest.fixture(scope="session")
def right_octagon():
    """Right-angled regular octagon (m = 4, k = 1)."""
    return pg.build(pg.PolygonSpec.uniform(4, 1))


@pytest.fixture(scope="session")
def decagon():
    """Regular decagon with angle sum 4 pi (m = 5, k = 1)."""
    return pg.build(pg.PolygonSpec.uniform(5, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_disk_point(rng, max_radius=0.95):
    r = max_radius * math.sqrt(rng.uniform())
    return r * complex(math.cos(t := rng.uniform(0, 2 * math.pi)), math.sin(t))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line[1])
