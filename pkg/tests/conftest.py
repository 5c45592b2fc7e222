import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict(capsys):
    """Record one PASS/FAIL line for an acceptance criterion and echo it immediately."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _VERDICTS.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
