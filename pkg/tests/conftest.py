import re

import pytest

_LINES: list[str] = []


class AcceptanceReport:
    def record(self, key: str, title: str, ok: bool, detail: str = "") -> None:
        _LINES.append(f"{'PASS' if ok else 'FAIL'}  [{key}] {title}: {detail}")
        assert ok, f"[{key}] {title}: {detail}"

    def skip(self, key: str, title: str, reason: str) -> None:
        _LINES.append(f"SKIP  [{key}] {title}: {reason}")
        pytest.skip(reason)


@pytest.fixture
def acceptance():
    return AcceptanceReport()


def _order(line):
    num, tail = re.match(r".*?\[(\d+)(\w*)\]", line).groups()
    return int(num), tail


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=_order):
            terminalreporter.write_line(line)
