import numpy as np
import pytest

from biloc.bilocal import canonical_max_violation

SQRT8 = 2 * np.sqrt(2)

_criteria: dict[str, tuple[str, str]] = {}


@pytest.fixture
def canonical():
    return canonical_max_violation()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def criterion_log():
    """Acceptance tests store (criterion id, detail) here for the terminal summary."""
    return _criteria


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    detail = _criteria.get(name, ("", ""))[1]
    _criteria[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    rows = [(k, v) for k, v in _criteria.items() if v[0]]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in sorted(rows):
        terminalreporter.write_line(f"{status} {name}: {detail}")
