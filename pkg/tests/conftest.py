import re

import pytest

from tcantilever import MaterialSpec, TGeometry

UM = 1e-6

# one line per acceptance criterion, printed at the end of the run
CRITERIA = []


def record(number, description, ok, detail=""):
    CRITERIA.append((number, description, bool(ok), detail))
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {description}"
    print(line + (f" ({detail})" if detail else ""))
    return ok


def _order(entry):
    label = str(entry[0])
    return int(re.match(r"\d+", label).group()), label


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, ok, detail in sorted(CRITERIA, key=_order):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}: {description}" + (f" -- {detail}" if detail else ""))


@pytest.fixture
def silicon():
    return MaterialSpec(169e9, 2330.0)


@pytest.fixture
def device4():
    return TGeometry.from_total_length(400 * UM, 70 * UM, 64 * UM, 100 * UM, 15 * UM)


@pytest.fixture
def device1():
    return TGeometry.from_total_length(400 * UM, 350 * UM, 64 * UM, 100 * UM, 15 * UM)


@pytest.fixture
def chip1_base():
    return TGeometry.from_total_length(400 * UM, 200 * UM, 64 * UM, 100 * UM, 15 * UM)
