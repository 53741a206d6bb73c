"""Shared fixtures.

The q=2 and q=3 character tables are the expensive shared state; build each
once per session and hand the same objects to every module.
"""

import numpy as np
import pytest

from gsp4bessel.bessel import HomEngine
from gsp4bessel.chartab import build_character_table
from gsp4bessel.ffield import make_field


@pytest.fixture(scope="session")
def field2():
    return make_field(2, 1)


@pytest.fixture(scope="session")
def field3():
    return make_field(3, 1)


@pytest.fixture(scope="session")
def table2(field2):
    return build_character_table(field2, "gsp")


@pytest.fixture(scope="session")
def table3(field3):
    return build_character_table(field3, "gsp")


@pytest.fixture(scope="session")
def engine2(table2):
    return HomEngine(table2)


@pytest.fixture(scope="session")
def engine3(table3):
    return HomEngine(table3)


def reduced_values(table):
    """Character values in the canonical basis of Q(zeta_e); two tables agree
    exactly iff these tensors are equal."""
    return np.tensordot(table.values.astype(np.int64), table.ring.reduce_rows, axes=(2, 0))
