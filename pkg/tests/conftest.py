"""Shared fixtures plus the acceptance-criteria summary section.

Tests in test_acceptance.py mark themselves with @pytest.mark.acceptance("...");
after the run a PASS/FAIL line per criterion is printed so the acceptance
status can be read off the bottom of the pytest output.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from adtrisk import compare_tree, parse_tree_file, validate_tree

REPO_ROOT = Path(__file__).resolve().parent.parent
EXAMPLES = REPO_ROOT / "examples"

ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def iot_source() -> str:
    return (EXAMPLES / "iot_case_study.adt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def iot_tree(iot_source):
    result = parse_tree_file(iot_source, "iot_case_study.adt")
    assert result.ok, [str(e) for e in result.errors]
    assert validate_tree(result.tree) == []
    return result.tree


@pytest.fixture(scope="session")
def iot_rows(iot_tree):
    return compare_tree(iot_tree)


@pytest.fixture(scope="session")
def minimal_source() -> str:
    return (EXAMPLES / "minimal.adt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def minimal_tree(minimal_source):
    result = parse_tree_file(minimal_source, "minimal.adt")
    assert result.ok, [str(e) for e in result.errors]
    return result.tree


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): marks a test as one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        ACCEPTANCE_RESULTS.append((marker.args[0], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{outcome}: {name}")
