"""Shared fixtures; collects acceptance outcomes and prints one line per criterion."""
import time
from contextlib import contextmanager

import pytest

_OUTCOMES: dict[int, tuple[str, bool, list[str]]] = {}


class CriterionLog:
    def __init__(self, number: int, title: str, time_limit: float | None):
        self.number = number
        self.title = title
        self.time_limit = time_limit
        self.checks: list[tuple[str, bool, str]] = []

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def failures(self) -> list[str]:
        return [f"{name}: {detail}" if detail else name for name, ok, detail in self.checks if not ok]


@pytest.fixture
def criterion():
    """Usage: ``with criterion(3, "title", time_limit=5.0) as c: c.check(...)``.

    Timing covers the whole block; a failed check fails the test on exit.
    """

    @contextmanager
    def open_log(number: int, title: str, time_limit: float | None = None):
        log = CriterionLog(number, title, time_limit)
        start = time.perf_counter()
        yield log
        elapsed = time.perf_counter() - start
        if time_limit is not None:
            log.check("runtime", elapsed < time_limit, f"{elapsed:.3f}s (limit {time_limit}s)")
        lines = [f"{name}: {'ok' if ok else 'FAILED'} {detail}".rstrip() for name, ok, detail in log.checks]
        _OUTCOMES[number] = (title, not log.failures, lines)
        assert not log.failures, "; ".join(log.failures)

    return open_log


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, ok, lines = _OUTCOMES[number]
        tr.write_line(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}")
        for line in lines:
            tr.write_line(f"    {line}")
