import sys
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vakg import kernels  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def fixtures_dir():
    return FIXTURES


_criteria = {}
_outcomes = defaultdict(list)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            number, title = mark.args
            _criteria[number] = title
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    for key, value in report.user_properties:
        if key == "criterion" and (report.when == "call" or report.failed or report.skipped):
            _outcomes[value].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        results = _outcomes.get(number, [])
        ok = bool(results) and all(r == "passed" for r in results)
        status = "PASS" if ok else ("NOT RUN" if not results else "FAIL")
        terminalreporter.write_line(f"criterion {number}: {status} - {_criteria[number]} ({len(results)} checks)")
