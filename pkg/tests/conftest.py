"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        detail = dict(report.user_properties).get("detail", "")
        prev = _results.get(report.nodeid)
        if prev is None or prev[0] == "PASS":
            _results[report.nodeid] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_results):
        status, detail = _results[nodeid]
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))
