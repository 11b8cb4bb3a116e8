import pytest

_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record ``(number, passed, detail)`` for the end-of-run acceptance table."""
    def record(number, passed, detail):
        request.config.stash.setdefault(_RESULTS, []).append((number, bool(passed), detail))
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter, config):
    rows = config.stash.get(_RESULTS, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(rows, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {detail}")
