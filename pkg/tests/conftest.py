"""Shared fixtures plus a per-criterion summary for the acceptance tests.

Tests marked ``@pytest.mark.acceptance("<id>: <what it checks>")`` get one
PASS/FAIL/SKIP line each in the terminal summary, so a full run ends with
a criterion-by-criterion scoreboard.
"""
import numpy as np
import pytest

_ACCEPTANCE_RESULTS: dict[str, object] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(line): top-level acceptance criterion; argument is the summary line",
    )
    config.addinivalue_line("markers", "slow: multi-second benchmark-style test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    line = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        _ACCEPTANCE_RESULTS[line] = rep


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(_ACCEPTANCE_RESULTS):
        rep = _ACCEPTANCE_RESULTS[line]
        word = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        terminalreporter.write_line(f"[{word}] {line}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
