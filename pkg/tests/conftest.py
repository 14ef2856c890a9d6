import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion.

    The test sets ``rec["detail"]``; the outcome is taken from the test
    report so a failing assertion is reported as FAIL with its detail.
    """
    rec = {"name": request.node.name, "detail": ""}
    yield rec
    ACCEPTANCE_LINES.append(rec)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "criterion" in item.fixturenames:
        item.funcargs["criterion"]["passed"] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for rec in ACCEPTANCE_LINES:
        status = "PASS" if rec.get("passed") else "FAIL"
        terminalreporter.write_line(f"{status}  {rec['name']}: {rec['detail']}")
