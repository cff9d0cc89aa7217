import pytest

_VERDICTS = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; the summary prints them in order."""

    def record(number: int, ok: bool, detail: str) -> None:
        _VERDICTS[number] = (ok, detail)
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
