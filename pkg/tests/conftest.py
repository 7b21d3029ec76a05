import warnings

import pytest

from expray.address import parse_address

warnings.filterwarnings("ignore", message=".*TBB.*")

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def addr():
    return parse_address


@pytest.fixture
def criterion(request):
    """record(number, ok, detail): log one acceptance line and fail the test if not ok."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
