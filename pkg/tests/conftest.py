from __future__ import annotations

import numpy as np
import pytest

from frameweave.systems.frame_core import SystemParams, WeavingPattern
from frameweave.systems.generators import make_indicator_gabor, make_powerlaw_wavelet


@pytest.fixture
def powerlaw():
    return make_powerlaw_wavelet(0.5, 1.0)


@pytest.fixture
def base_params():
    return SystemParams(a=2.0, b=0.5, N=1)


@pytest.fixture
def woven_params():
    return SystemParams(a=2.0, b=0.5, N=2)


@pytest.fixture
def constant1():
    return WeavingPattern.constant(1)


@pytest.fixture
def window3():
    return make_indicator_gabor(3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
