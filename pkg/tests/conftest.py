import contextlib

import pytest

# criterion number -> (passed, detail), filled by tests/test_acceptance.py
RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def check(n: int, label: str):
        try:
            yield
        except BaseException as exc:
            RESULTS[n] = (False, f"{label}: {type(exc).__name__}: {exc}".splitlines()[0])
            raise
        RESULTS[n] = (True, label)

    return check


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
