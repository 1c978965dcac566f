"""Prints one line per acceptance criterion at the end of the session."""

_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for nodeid in sorted(_results):
        rep = _results[nodeid]
        name = nodeid.split("::")[-1][len("test_criterion_"):]
        num, _, label = name.partition("_")
        measured = dict(rep.user_properties).get("measured", "")
        status = "PASS" if rep.passed else "FAIL"
        tr.write_line(f"criterion {int(num):2d} {status}  {label.replace('_', ' ')}  {measured}".rstrip())
