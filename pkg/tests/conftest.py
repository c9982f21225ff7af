import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from contdiam.geometry import CycleNetwork, PathNetwork

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def regular_polygon(n: int, radius: float = 1.0) -> CycleNetwork:
    k = np.arange(n)
    return CycleNetwork(np.column_stack([radius * np.cos(2 * np.pi * k / n), radius * np.sin(2 * np.pi * k / n)]))


def random_convex_cycle(rng: np.random.Generator, max_vertices: int = 32, n_points: int | None = None) -> CycleNetwork:
    """Hull of random points with an anisotropic stretch; at most ``max_vertices`` vertices."""
    while True:
        n = n_points if n_points is not None else int(rng.integers(4, 3 * max_vertices))
        pts = rng.normal(size=(n, 2)) * rng.uniform(0.3, 3.0, size=2)
        hull = ConvexHull(pts)
        if 3 <= len(hull.vertices) <= max_vertices:
            return CycleNetwork(pts[hull.vertices])


def random_path(rng: np.random.Generator, max_vertices: int = 20) -> PathNetwork:
    n = int(rng.integers(2, max_vertices + 1))
    steps = rng.normal(size=(n - 1, 2))
    return PathNetwork(np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_square():
    return CycleNetwork([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def l_path():
    return PathNetwork([(0, 0), (4, 0), (4, 4)])


@pytest.fixture
def straight_path():
    return PathNetwork([(0, 0), (10, 0)])


def circle_gap_root() -> float:
    """Root of 2 sin(pi/4 + b/2) = pi/2 - b by plain bisection."""
    def f(b):
        return 2.0 * math.sin(math.pi / 4 + b / 2) - (math.pi / 2 - b)

    lo, hi = 0.0, 0.5
    assert f(lo) < 0 < f(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
