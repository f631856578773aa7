import pytest

# Lines recorded by the acceptance module, echoed in the terminal summary.
ACCEPTANCE_LINES = {}


def record_acceptance(number, title, passed, detail):
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} | {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
