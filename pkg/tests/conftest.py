import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from matchlab.points import fixed_count

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_small_config(seed, max_total=8, dim=1, two_colour=True, max_per_colour=8):
    """A uniform configuration with random sizes, for oracle comparisons."""
    rng = np.random.default_rng(seed)
    window = [(0.0, 10.0)] * dim
    if two_colour:
        while True:
            nr = int(rng.integers(0, max_per_colour + 1))
            nb = int(rng.integers(0, max_per_colour + 1))
            if 1 <= nr + nb <= max_total:
                break
        return fixed_count(window, nr, nb, seed=seed, dim=dim, mode="two-colour")
    n = int(rng.integers(1, max_total + 1))
    return fixed_count(window, n, 0, seed=seed, dim=dim, mode="one-colour")


@pytest.fixture
def small_config():
    return random_small_config
