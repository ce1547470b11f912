import numpy as np
import pytest

from aftermeasure.measurements import computational_orri
from aftermeasure.sic import sic_povm


def random_hermitian(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sic2():
    return sic_povm(2)


@pytest.fixture(scope="session")
def sic3():
    return sic_povm(3)


@pytest.fixture(scope="session")
def zbasis():
    return computational_orri(2)
