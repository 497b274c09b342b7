import math

import numpy as np
import pytest
from hypothesis import settings

from wormkit.domains import DomainParams, Variant

settings.register_profile("wormkit", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("wormkit")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def prime():
    return DomainParams(1.5 * math.pi)


@pytest.fixture
def unprime():
    return DomainParams(1.5 * math.pi, Variant.DBeta)
