_VERDICTS: list[str] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _VERDICTS.extend(ln for ln in report.capstdout.splitlines() if ln.startswith(("PASS criterion", "FAIL criterion")))


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
