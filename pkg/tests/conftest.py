import time
from contextlib import contextmanager

import pytest

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance line: number, verdict, runtime vs budget."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    @contextmanager
    def run(number: int, title: str, budget_s: float):
        t0 = time.perf_counter()
        verdict, detail = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - t0
            if elapsed > budget_s:
                detail = f"over budget: {elapsed:.2f}s > {budget_s}s"
                raise AssertionError(detail)
            verdict = "PASS"
        except AssertionError as exc:
            detail = detail or str(exc).splitlines()[0][:160]
            raise
        finally:
            elapsed = time.perf_counter() - t0
            line = f"criterion {number:2d} {verdict}  {title}  ({elapsed:.2f}s / {budget_s}s)"
            if detail:
                line += f"  {detail}"
            lines.append((number, line))
            print(line)
    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
