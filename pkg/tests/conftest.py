import numpy as np
import pytest

from esdlab.qmat import x_state


@pytest.fixture
def case_one():
    return x_state(1 / 3, 1 / 6, 1 / 6, 1 / 3, w=1 / 3, z=0)


@pytest.fixture
def case_two():
    return x_state(1 / 3, 0, 1 / 3, 1 / 3, w=1 / 6, z=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20051224)


_VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record and assert one acceptance criterion."""
    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
        _VERDICTS[number] = line
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[number])
