import pytest

from ais_kit import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # pay any one-time JIT compilation before tests start timing things
    kernels.warmup()
