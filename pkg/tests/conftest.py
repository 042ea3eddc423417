import math

import numpy as np
import pytest

from rotkit.fourier import FourierSeries

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SILVER = math.sqrt(2.0) - 1.0


def random_real_series(dim, order, decay_r, seed, value_dim=1, scale=1.0):
    """Seeded real-symmetric series with |c_k| ~ scale * exp(-decay_r*|k|_1)."""
    rng = np.random.default_rng(seed)
    side = 2 * order + 1
    shape = (value_dim,) + (side,) * dim
    c = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    ax = np.abs(np.arange(-order, order + 1)).astype(float)
    absk = ax
    for _ in range(dim - 1):
        absk = absk[..., np.newaxis] + ax
    c *= scale * np.exp(-decay_r * absk)
    flipped = np.conj(c[(slice(None),) + (slice(None, None, -1),) * dim])
    c = 0.5 * (c + flipped)
    return FourierSeries(c, dim)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
