"""Shared test plumbing: the acceptance-criteria verdict registry.

Acceptance tests record one entry per criterion before asserting, so the
terminal summary always carries one PASS/FAIL line per criterion even when
a criterion's assertion fails.
"""

import pytest

_ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def acceptance():
    def record(number: int, description: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((number, description, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, desc, passed, detail in sorted(_ACCEPTANCE):
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {number:>2}: {verdict}  {desc}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line, green=passed, red=not passed)
