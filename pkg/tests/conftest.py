import pytest

from masse.crypto import setup_params
from support import CRITERIA, World, small_db


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def pp():
    return setup_params(128)


@pytest.fixture(scope="session")
def pp256():
    return setup_params(256)


@pytest.fixture
def world(pp):
    return World(pp, small_db())
