import numpy as np
import pytest

from hockeystick.core import basis_state, maximally_mixed


@pytest.fixture
def ket0():
    return basis_state(2, 0)


@pytest.fixture
def ket1():
    return basis_state(2, 1)


@pytest.fixture
def mixed2():
    return maximally_mixed(2)


@pytest.fixture
def third_pair():
    return np.diag([2 / 3, 1 / 3]).astype(complex), np.diag([1 / 3, 2 / 3]).astype(complex)
