import pytest

# criterion number -> summary line, filled in by test_acceptance
ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def acceptance(pytestconfig):
    """Record the one-line outcome of an acceptance criterion."""
    lines = pytestconfig.stash[ACCEPTANCE]

    def record(n, ok, detail):
        lines[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(lines[n])
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[ACCEPTANCE]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
