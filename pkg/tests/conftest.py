"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.failed:
        if _criteria.get(name) != "FAIL":
            _criteria[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        terminalreporter.write_line(f"{_criteria[name]}  {name}")
