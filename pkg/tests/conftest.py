import pytest

from somepairs import _accel

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=_accel.available_backends())
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
