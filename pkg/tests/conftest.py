"""Shared pytest plumbing.

Acceptance tests report one line per criterion; pytest swallows stdout
of passing tests, so the lines are replayed in the terminal summary.
"""

CRITERION_LINES: list[str] = []


def record_criterion_line(line: str) -> None:
    CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERION_LINES:
        terminalreporter.write_line(line)
