import pytest

_LINES: list[str] = []


class Acceptance:
    """Records one PASS/FAIL line per acceptance criterion."""

    def record(self, number: int, title: str, passed: bool, detail: str = "") -> None:
        tag = "PASS" if passed else "FAIL"
        line = f"[{tag}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        _LINES.append(line)
        print(line)


@pytest.fixture
def acceptance():
    return Acceptance()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

