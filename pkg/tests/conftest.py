import pytest

# criterion number -> (passed, title, detail), filled by test_acceptance
ACCEPTANCE = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (bool(passed), title, detail)
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}  {detail}".rstrip())


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
