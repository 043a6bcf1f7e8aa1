"""Prints the acceptance checklist after the run, outside output capture."""

from tests import support


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if support.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in support.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
