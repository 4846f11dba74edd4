import pytest

_CRITERIA = []


@pytest.fixture
def criterion(capsys):
    """``criterion(n, name, ok, detail)`` prints and records one pass/fail line."""

    def record(number, name, ok, detail):
        line = f"CRITERION {number} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _CRITERIA.append((number, line))
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda p: p[0]):
        terminalreporter.write_line(line)
