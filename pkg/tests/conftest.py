import numpy as np
import pytest

# acceptance lines keyed by (criterion, label, title), filled in by tests/test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def record(number, title: str, ok: bool, detail: str) -> None:
    """``number`` is an int or a sub-criterion label such as "6b"."""
    tag = str(number)
    key = (int(tag.rstrip("abc")), tag, title)
    ACCEPTANCE_LINES[key] = f"{'PASS' if ok else 'FAIL'} [{tag:>2}] {title}: {detail}"
    print(ACCEPTANCE_LINES[key])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
