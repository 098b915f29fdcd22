import numpy as np
import pytest

from softq.models import two_state_mdp
from softq.models.mdp import validate_arrays
from softq.services import optimal_q


@pytest.fixture(scope="session")
def mdp():
    return two_state_mdp()


@pytest.fixture(scope="session")
def q_star(mdp):
    return optimal_q(mdp)


@pytest.fixture
def single_state_mdp():
    """Un estado, una accion, recompensa 1 y gamma 0.9."""
    return validate_arrays(np.ones((1, 1, 1)), np.ones((1, 1, 1)), 0.9)
