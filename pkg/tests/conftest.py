"""Collects one PASS/FAIL line per acceptance criterion and prints them after the run."""

import pytest

_RESULTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    details = [v for k, v in item.user_properties if k == "detail"]
    _RESULTS[number] = (title, report.passed, details)


@pytest.fixture
def detail(request):
    """``detail("text")`` attaches a measurement to the criterion's summary line."""

    def add(text):
        request.node.user_properties.append(("detail", text))
        print(text)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, details = _RESULTS[number]
        tr.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {title}")
        for d in details:
            tr.write_line(f"      {d}")
