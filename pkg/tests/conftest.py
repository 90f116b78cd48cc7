from pathlib import Path

import pytest

from gasmet.parser import parse

DATA = Path(__file__).parent / "data"
MINICORPUS = DATA / "minicorpus"


@pytest.fixture
def minicorpus() -> Path:
    return MINICORPUS


@pytest.fixture
def data_dir() -> Path:
    return DATA


def unit_of(source: str, file_id: str = "t.sol"):
    return parse(source, file_id)


# One pass/fail line per acceptance criterion, printed after the run.
_ACCEPTANCE: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    label = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    _ACCEPTANCE.append(f"{status} {label} ({report.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
