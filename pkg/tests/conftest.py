import pytest

# (criterion number, passed, detail) lines collected by the acceptance suite.
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    def report(number, title, failures, detail=""):
        ok = not failures
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}"
        if detail:
            line += f" [{detail}]"
        if failures:
            line += " -- " + "; ".join(failures[:5])
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
