import pytest

from h2vdw import perturbation

# lines collected by the acceptance suite and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def workspace19():
    """phi_0..phi_9 at degree 11, extended precision."""
    return perturbation.build_history(19, 11, "extended")


@pytest.fixture(scope="session")
def table19(workspace19):
    return perturbation.run(19, 11, workspace=workspace19)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
