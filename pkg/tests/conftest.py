import numpy as np
import pytest

from coopmac.ensemble import build_uniform_grid
from coopmac.solver import SolverConfig, optimize

# the reference uniform-grid scenario used across test modules:
# direct links on 0.025 .. 0.25, inter-user links on 0.26 .. 0.35
DIRECT_VALUES = 0.025 * np.arange(1, 11)
INTER_VALUES = 0.26 + 0.01 * np.arange(10)


@pytest.fixture(scope="session")
def uniform_grid_ensemble():
    return build_uniform_grid(DIRECT_VALUES, INTER_VALUES)


@pytest.fixture(scope="session")
def uniform_sumrate_result(uniform_grid_ensemble):
    """Converged equal-weight run shared by structure and acceptance tests."""
    return optimize(uniform_grid_ensemble, (1.0, 1.0), SolverConfig())
