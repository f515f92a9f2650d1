import numpy as np
import pytest

from hausdorff import GridParams, KernelSpec, OperatorHandle

# coarse lattice for the generic-shift and custom-scaling paths
SMALL_T = GridParams.symmetric(48.0, 2**13)
SMALL_S = GridParams.symmetric(32.0, 2**11)


@pytest.fixture(scope="session")
def hardy():
    return OperatorHandle.from_kernel(KernelSpec.hardy())


@pytest.fixture(scope="session")
def log_gaussian():
    return OperatorHandle.from_kernel(KernelSpec.log_gaussian(1.0))


@pytest.fixture(scope="session")
def trunc_power():
    return OperatorHandle.from_kernel(KernelSpec.truncated_power(-2.5, 2.0))


@pytest.fixture(scope="session")
def zero_op():
    return OperatorHandle.from_kernel(KernelSpec.zero())


@pytest.fixture(scope="session")
def presets(hardy, log_gaussian, trunc_power):
    return {"hardy": hardy, "log_gaussian": log_gaussian, "truncated_power": trunc_power}


@pytest.fixture(scope="session")
def even_gaussian():
    # K(u) = K(-u), so K_minus = K_plus
    return OperatorHandle.from_kernel(KernelSpec.log_gaussian(1.0).symmetrized(1))


def rel_sup(x, y):
    x, y = np.asarray(x), np.asarray(y)
    return float(np.abs(x - y).max() / max(np.abs(y).max(), 1e-300))
