from __future__ import annotations

import pytest

from boundedgaps.arith import sieve_primes

_CRITERIA: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): one acceptance criterion line")


@pytest.fixture(scope="session")
def table():
    return sieve_primes(3_000_000)


@pytest.fixture(scope="session")
def small_table():
    return sieve_primes(2_000_000)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA.append(("PASS" if rep.passed else "FAIL", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for status, label in _CRITERIA:
        terminalreporter.write_line(f"{status}  {label}")
    passed = sum(1 for s, _ in _CRITERIA if s == "PASS")
    terminalreporter.write_line(f"{passed}/{len(_CRITERIA)} criteria lines pass")
