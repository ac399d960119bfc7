import numpy as np
import pytest

from momdp_pareto import gen_random_mdp

from helpers import make_bandit


@pytest.fixture(scope="session")
def mdp433():
    return gen_random_mdp(0, 4, 3, 3)


@pytest.fixture(scope="session")
def bandit3():
    """Three arms paying (1,0), (0,1) and (0.4,0.4); front is one edge."""
    return make_bandit(np.array([[1.0, 0.0], [0.0, 1.0], [0.4, 0.4]]))
