import re

import pytest

_CRITERIA: dict[int, dict] = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+?)(?:\[|$)")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        num = int(m.group(1))
        entry = _CRITERIA.setdefault(num, {"name": m.group(2).replace("_", " "), "passed": True, "failed": []})
        if report.outcome != "passed":
            entry["passed"] = False
            entry["failed"].append(report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "PASS" if e["passed"] else "FAIL"
        extra = "" if e["passed"] else f"  ({', '.join(e['failed'])})"
        terminalreporter.write_line(f"criterion {num:2d} {status}: {e['name']}{extra}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240601)
