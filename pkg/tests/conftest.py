import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def report(request):
    """Record one pass/fail line for the acceptance summary."""
    lines = request.config.stash[_LINES]

    def _report(n, ok, detail):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        return ok
    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
        terminalreporter.write_line(line)
