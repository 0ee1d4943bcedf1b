from __future__ import annotations

import sys
import warnings
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from alphamu.series import PrecisionWarning  # noqa: E402

_CRITERIA: dict[int, list[tuple[str, str]]] = defaultdict(list)

CRITERION_TITLES = {
    1: "PDF accuracy table: values, term counts, bounds",
    2: "CDF accuracy table: values, term counts, bounds",
    3: "timing-table value columns",
    4: "L=1 reduction to the marginal",
    5: "normalization of the sum density",
    6: "oracle triangle (series, convolution, Monte Carlo)",
    7: "truncation bound dominance",
    8: "asymptotic log-log slopes",
    9: "ASER series vs quadrature and Rayleigh closed form",
    10: "per-point cost flat in L and below 1 ms",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def quiet_precision():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        yield


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = getattr(report, "_criterion", None)
    if crit is not None:
        _CRITERIA[crit].append((report.nodeid, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep._criterion = int(marker.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA):
        results = _CRITERIA[crit]
        passed = sum(1 for _, o in results if o == "passed")
        verdict = "PASS" if passed == len(results) else "FAIL"
        terminalreporter.write_line(
            f"criterion {crit:2d} {verdict}  {passed}/{len(results)} checks  "
            f"{CRITERION_TITLES.get(crit, '')}")
