import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line and fail the test when the criterion does not hold."""

    def report(name: str, ok: bool, detail: str, warn: bool = False) -> None:
        state = "PASS" if ok else "FAIL"
        if ok and warn:
            state = "PASS (warning)"
        line = f"{state} [{name}] {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
