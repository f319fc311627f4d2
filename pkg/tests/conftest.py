import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lattice_nls import ContinuumField, SamplingSpec, TorusGrid, sample_initial_data

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

LENGTH = 51.2
M_REF = 4096


@pytest.fixture(scope="session")
def fine():
    return TorusGrid.with_nodes(LENGTH, M_REF)


def gaussian_pair(fine):
    x = fine.x
    psi0 = ContinuumField(fine, np.exp(-(x**2) / 2) * np.exp(0.5j * x))
    phi0 = ContinuumField(fine, 0.8 * np.exp(-((x - 1) ** 2) / 2))
    return psi0, phi0


@pytest.fixture(scope="session")
def pair(fine):
    return gaussian_pair(fine)


@pytest.fixture
def sampled(pair):
    def make(h, gamma=0.5):
        return sample_initial_data(*pair, SamplingSpec(h, gamma))

    return make


def random_complex(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
