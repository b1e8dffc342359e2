import pytest

from slaq import ServiceDist, WtpModel, grid_population

# one line per acceptance criterion, printed in the terminal summary so
# the verdicts are visible even though pytest captures test stdout
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance():
    def record(num, name, ok, detail=""):
        line = f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" [{detail}]"
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return record


@pytest.fixture(scope="session")
def model():
    return WtpModel(p=1.0, T=0.05, beta=3.0)


@pytest.fixture(scope="session")
def pop_dense():
    """50 uniform types at zero-value offset spacing 0.02."""
    return grid_population(n=50, delta=0.02)


@pytest.fixture(scope="session")
def pop_wide():
    """50 uniform types at zero-value offset spacing 0.04."""
    return grid_population(n=50, delta=0.04)


@pytest.fixture(scope="session")
def exp_dist():
    return ServiceDist.exponential()
