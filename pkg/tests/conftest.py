import numpy as np
import pytest

from spinbath import NoiseParams


@pytest.fixture
def params():
    """Headline bath parameters used throughout: 5 kHz coupling, 100 us memory."""
    return NoiseParams(b=5.0, tau_c=100.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
