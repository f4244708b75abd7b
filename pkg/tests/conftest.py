import pytest

# criterion number -> (title, PASS/FAIL)
_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        number, title = marker.args
        failed = report.failed or (report.when == "call" and report.skipped)
        if failed or number not in _results:
            _results[number] = (title, "FAIL" if failed else "PASS")
    return report


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, status = _results[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title}")
