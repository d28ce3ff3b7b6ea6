import numpy as np
import pytest

from segseed.image import Image2D, LabelMap

_criteria = []


@pytest.fixture
def criterion_report():
    """Record one acceptance line: report(number, passed, detail)."""

    def report(number, passed, detail):
        _criteria.append((number, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")

    return report


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_criteria, key=lambda c: c[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number}. {detail}")


def make_image(rows):
    return Image2D(np.array(rows))


def make_labels(rows):
    return LabelMap(np.array(rows))
