import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL summary line for an acceptance criterion."""
    records = {}

    def record(number: int, detail: str):
        records["number"] = number
        records["detail"] = detail

    yield record
    if "number" in records:
        rep = getattr(request.node, "rep_call", None)
        status = "PASS" if rep is not None and rep.passed else "FAIL"
        ACCEPTANCE_LINES[records["number"]] = f"criterion {records['number']}: {status}  {records['detail']}"


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
