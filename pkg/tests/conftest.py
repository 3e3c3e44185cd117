"""Shared test plumbing: the acceptance suite registers its verdict lines
here so they appear in the terminal summary, outside pytest's capture."""

ACCEPTANCE_LINES = []


def record_verdict(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
