import math

import pytest

from qprec import models as md
from qprec import quantizer as qt


@pytest.fixture(scope="session")
def one_bit_q():
    return qt.one_bit(1.0 / math.sqrt(2.0))


@pytest.fixture(scope="session")
def rzf_shaping():
    return md.rzf(0.25)


@pytest.fixture(scope="session")
def small_config():
    return md.SystemConfig.with_gamma(k=8, gamma=4.0, sigma2_noise=0.1)


@pytest.fixture(scope="session")
def mid_config():
    return md.SystemConfig.with_gamma(k=64, gamma=4.0, sigma2_noise=0.1)
