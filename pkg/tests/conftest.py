import pytest

from nlfront.grid import make_grid

# (criterion number, title, passed, detail) filled in by test_acceptance
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def grid_small():
    return make_grid((-2.0, -2.0), 0.05, 81, 81)


@pytest.fixture
def grid_mid():
    return make_grid((-2.0, -2.0), 0.02, 201, 201)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
