import numpy as np
import pytest

from poisson_doe.catalog import design_2d_interaction
from poisson_doe.model import two_dim_model

RHO_MATRIX = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0]

# acceptance lines collected by test_acceptance.py and repeated in the summary
ACCEPTANCE_LINES = []


def standard_pair(rho):
    model = two_dim_model([0.0, -1.0, -1.0, -rho])
    return model, design_2d_interaction(model)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
