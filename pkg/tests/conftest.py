import numpy as np
import pytest

from rodeokde.rodeo import RodeoConfig, select_local_bandwidths


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    # compile the numba core once so per-test timings are meaningful
    rng = np.random.default_rng(0)
    select_local_bandwidths(rng.random(2), rng.random((8, 2)), RodeoConfig())
