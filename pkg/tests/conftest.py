"""Shared pytest plumbing: the acceptance report printed after the run."""

import pytest

_REPORT: list[tuple[int, bool, str]] = []


@pytest.fixture
def report():
    """Record one acceptance line, print it, and fail the test if not ok."""

    def _report(number: int, ok: bool, detail: str) -> None:
        _REPORT.append((number, bool(ok), detail))
        print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number}: {detail}"

    return _report


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_REPORT, key=lambda r: r[0]):
        terminalreporter.write_line(
            f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
