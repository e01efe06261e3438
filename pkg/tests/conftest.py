"""Shared fixtures and the acceptance-line reporter.

Acceptance tests register one human-readable pass/fail line each; the lines
are replayed in the terminal summary so a plain `pytest -v` run shows them.
"""

from __future__ import annotations

import pytest

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: int, passed: bool, detail: str) -> None:
    flag = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {criterion} {flag}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def battery():
    """The randomized pathwise battery shared by the slack and p=2 criteria."""
    from levyconv.scenarios import run_jump_battery

    return run_jump_battery(1000, master_seed=20240502, base_cells=24, levels=3)
