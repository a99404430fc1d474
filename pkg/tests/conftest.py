import pytest

from triples.lang import ApiRegistry
from triples.world import spawn_world


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        if report.passed:
            print(f"\n[acceptance] {name}: PASS")
        elif report.failed:
            print(f"\n[acceptance] {name}: FAIL")
        elif report.skipped:
            print(f"\n[acceptance] {name}: SKIP")


@pytest.fixture
def obs_world():
    return spawn_world("observable", 7)


@pytest.fixture
def part_world():
    return spawn_world("partial", 7)


@pytest.fixture
def registry():
    return ApiRegistry()
