import numpy as np
import pytest
from threadpoolctl import threadpool_limits

# multithreaded BLAS thrashes badly when interleaved with the synthesis
# kernel on small machines; parallelism comes from worker processes instead
threadpool_limits(limits=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def pytest_configure(config):
    np.seterr(over="raise", invalid="ignore")
