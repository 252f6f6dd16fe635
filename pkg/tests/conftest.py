import pytest

from hyperlim import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile once so timed tests measure the algorithms, not the jit
    kernels.warmup()
