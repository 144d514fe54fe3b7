from __future__ import annotations

import numpy as np
import pytest

from chartgeom.catalog import get_entry
from chartgeom.geometry import Chart
from chartgeom.harness import sample_domain
from chartgeom.operators import FieldDef


def make_chart(metric, coords=("x", "y"), lower=(-1, -1), upper=(1, 1), name="test", j=None):
    n = len(coords)
    if isinstance(metric, str):
        metric = [[metric if i == k else "0" for k in range(n)] for i in range(n)]
    return Chart.from_strings(name, coords, metric, lower, upper, complex_structure=j)


def field(chart, kind, comps, name="f", target=None):
    return FieldDef.from_strings(name, chart, kind, comps, target)


def interior_points(chart, count=50, seed=0):
    """Seeded uniform points well inside the chart's box."""
    rng = np.random.default_rng(seed)
    lo = np.asarray(chart.domain.lower)
    hi = np.asarray(chart.domain.upper)
    pad = 0.05 * (hi - lo)
    return rng.uniform(lo + pad, hi - pad, size=(count, chart.dim))


@pytest.fixture
def plane():
    return make_chart("1", j=[["0", "-1"], ["1", "0"]], name="plane")


@pytest.fixture
def sphere():
    return get_entry("round-sphere-S2").chart("sphere")


@pytest.fixture
def hyperbolic():
    return get_entry("hyperbolic-half-plane").chart()


@pytest.fixture
def cigar():
    return get_entry("cigar").chart()


@pytest.fixture
def sphere3():
    return get_entry("sphere-S3").chart()


@pytest.fixture
def distorted():
    """A non-diagonal, non-conformally-flat chart to keep index bugs honest."""
    return make_chart([["1 + x^2", "0.3*x*y"], ["0.3*x*y", "2 + sin(y)"]], name="distorted")


def grid(chart, count=100):
    return sample_domain(chart, count=count)


# --- acceptance summary ------------------------------------------------------------------
# tests marked ``acceptance(number, title)`` get one PASS/FAIL line in the terminal summary

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed else "FAIL"
        _ACCEPTANCE[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
