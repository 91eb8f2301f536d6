"""Shared fixtures: the acceptance-gate reporter.

Gate lines are buffered here and echoed in the terminal summary, so the
per-criterion [PASS]/[FAIL] status is visible in the run log regardless of
output capturing.
"""

import pytest

_gate_lines = []


class GateReporter:
    def report(self, name: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        print(line, flush=True)
        _gate_lines.append(line)
        return ok


@pytest.fixture(scope="session")
def gate():
    return GateReporter()


def pytest_terminal_summary(terminalreporter):
    if _gate_lines:
        terminalreporter.write_sep("-", "acceptance gate")
        for line in _gate_lines:
            terminalreporter.write_line(line)
