import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# the double-pole (EX1) and three-pole (EX3) reference pencils
EX1_A0 = [[1, 0, 1], [1, 0, 0], [1, 0, 0]]
EX1_A1 = [[1, 0, -1], [0, 1, 0], [0, 1, 1]]
EX3_A0 = [[1, 1, 1], [1, 2, 1], [2, 1, 2]]
EX3_A1 = [[1, 0, 0], [0, 1, 0], [1, 0, 1]]


@pytest.fixture
def ex1():
    from pencilkit import LinearPencil
    return LinearPencil(np.array(EX1_A0, float), np.array(EX1_A1, float))


@pytest.fixture
def ex3():
    from pencilkit import LinearPencil
    return LinearPencil(np.array(EX3_A0, float), np.array(EX3_A1, float))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def ex3_region_basic(s, r):
    """Basic solution for the three-pole pencil on s < |z| < r, from the catalog pairs."""
    from pencilkit import Annulus, LinearPencil
    from pencilkit.catalog import THREE_POLE_REGIONS
    from pencilkit.determining import BasicSolution
    r_m1, r_0 = THREE_POLE_REGIONS[(float(s), float(r))]
    pencil = LinearPencil(np.array(EX3_A0, float), np.array(EX3_A1, float))
    return BasicSolution(r_m1=r_m1, r_0=r_0, pencil=pencil, annulus=Annulus(s, r))
