"""Shared pytest plumbing: echo acceptance-criterion results in the summary.

The acceptance tests append one "[criterion N] ...: PASS/FAIL" line each;
re-printing them after the run keeps the verdicts visible even though pytest
captures per-test stdout.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
