import sys


def pytest_terminal_summary(terminalreporter):
    """Echo one line per acceptance criterion after the run."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "CRITERION_RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in results:
        terminalreporter.write_line(line)
