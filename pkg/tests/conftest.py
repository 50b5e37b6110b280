import numpy as np
import pytest

from minkball.support_core import make_grid, support_of_polygon


def random_body(rng, grid, m=7, spread=1.0, centre=(0.0, 0.0)):
    """Support vector of the hull of ``m`` random points."""
    pts = rng.normal(size=(m, 2)) * spread + np.asarray(centre)
    return support_of_polygon(pts, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid360():
    return make_grid(360)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
