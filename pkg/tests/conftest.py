import pytest
from hypothesis import settings

from latsubst.systems import chair2d, chair_nd, sphinx

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def chair():
    return chair2d()


@pytest.fixture(scope="session")
def chair3():
    return chair_nd(3)


@pytest.fixture(scope="session")
def sphinx_bundle():
    return sphinx()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
