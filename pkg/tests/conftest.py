import pytest

# (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


@pytest.fixture
def acceptance_report():
    def record(criterion: int, passed: bool, detail: str):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
        print(line)
        ACCEPTANCE_LINES.append((criterion, passed, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
