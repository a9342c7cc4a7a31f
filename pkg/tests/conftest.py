import numpy as np
import pytest

from qpoisson import PoissonSystem

# Benchmark right-hand sides (unit norm as listed).
TABLE1 = {
    "3x3": (2, (2**-0.5, 0.5, 0.5)),
    "7x7": (3, (0.25, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5)),
    "15x15": (4, (0.25,) * 12 + (0.5, 0.0, 0.0)),
}


def make_system(name: str) -> PoissonSystem:
    n, b = TABLE1[name]
    return PoissonSystem(n=n, b=np.asarray(b))


@pytest.fixture
def sys_3x3():
    return make_system("3x3")


@pytest.fixture
def sys_7x7():
    return make_system("7x7")


@pytest.fixture
def sys_15x15():
    return make_system("15x15")
