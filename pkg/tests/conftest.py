import numpy as np
import pytest

from qensemble.harness.datasets import export_iris

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def iris_dir(tmp_path_factory):
    pytest.importorskip("sklearn")
    directory = tmp_path_factory.mktemp("iris")
    export_iris(directory)
    return directory


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
