import pytest

from fibernls.field import make_grid


@pytest.fixture(scope="session")
def grid2048():
    return make_grid(-20.0, 20.0, 2048)


@pytest.fixture(scope="session")
def grid1024():
    return make_grid(-20.0, 20.0, 1024)


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, title, passed, detail)``."""

    def record(number, title, passed, detail):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        _CRITERIA[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
