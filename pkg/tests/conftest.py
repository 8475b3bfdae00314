import pytest

from _verdicts import VERDICTS


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(VERDICTS, key=lambda k: int(k[2:])):
        ok, detail = VERDICTS[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}: {detail}")


@pytest.fixture
def verdict():
    """Record one acceptance line, then assert on it."""

    def record(key: str, ok: bool, detail: str):
        VERDICTS[key] = (ok, detail)
        print(f"{key} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return record
