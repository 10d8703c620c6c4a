import numpy as np
import pytest

from entrapnet.optimizer import UtilityConfig


@pytest.fixture
def paper_config():
    return UtilityConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
