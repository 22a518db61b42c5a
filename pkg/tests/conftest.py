import re

_ACCEPTANCE: dict[int, str] = {}


def pytest_runtest_logreport(report):
    for key, value in report.user_properties:
        if key == "acceptance":
            num, line = value
            _ACCEPTANCE[num] = line
    if report.when == "call" and report.failed:
        m = re.search(r"test_criterion_(\d+)_", report.nodeid)
        if m and int(m.group(1)) not in _ACCEPTANCE:
            _ACCEPTANCE[int(m.group(1))] = f"criterion {m.group(1)}: FAIL (raised before reporting)"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[num])
