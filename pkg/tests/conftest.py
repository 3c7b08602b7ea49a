import pytest

from wafkit import make_space_form

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def euclid():
    return make_space_form(0)


@pytest.fixture(scope="session")
def hyper():
    return make_space_form(-1)


@pytest.fixture(scope="session")
def sphere_space():
    return make_space_form(1)


@pytest.fixture(params=[0, -1, 1], ids=["R", "H", "S"], scope="session")
def space(request):
    return make_space_form(request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
