import numpy as np
import pytest

from diracsea import GaussianPulse, LatticeConfig, Potential1p1


@pytest.fixture
def small_config():
    return LatticeConfig(N=32, L=16.0, m=1.0, e=0.3, t0=-5.0, t1=5.0,
                         nsteps=160)


@pytest.fixture
def weak_a0(small_config):
    return Potential1p1.validated(
        small_config,
        a0_pulses=(GaussianPulse(amplitude=1.0, t_center=0.0, x_center=0.5,
                                 sigma_t=0.6, sigma_x=1.0),))


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
