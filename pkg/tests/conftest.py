"""Shared pytest hooks: per-criterion acceptance summary and the suite time budget."""

import time

import pytest

SUITE_BUDGET_S = 30.0

_outcomes: dict[str, list[bool]] = {}
_start = [0.0]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion): ties a test to an acceptance criterion such as 'A3'")
    _start[0] = time.perf_counter()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(marker.args[0], []).append(report.outcome == "passed")


def _full_run(config) -> bool:
    """True when pytest was started on the configured test paths without filters."""
    return (
        config.args_source == pytest.Config.ArgsSource.TESTPATHS
        and not config.option.keyword
        and not config.option.markexpr
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_outcomes):
        results = _outcomes[crit]
        verdict = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"{crit}: {verdict} ({sum(results)}/{len(results)} checks)")
    elapsed = time.perf_counter() - _start[0]
    if _full_run(config):
        verdict = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
        terminalreporter.write_line(f"A5 suite runtime: {verdict} ({elapsed:.2f} s, budget {SUITE_BUDGET_S:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _start[0]
    if _full_run(session.config) and elapsed >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED
