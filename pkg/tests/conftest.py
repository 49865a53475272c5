import numpy as np
import pytest

from ris_sop.model import SystemConfig, random_channels


@pytest.fixture
def scalar_cfg():
    return SystemConfig(n_t=1, n_r=1, n_e=1, n_s=1, alpha=1.0, beta=1.0, rho=3.0)


@pytest.fixture
def mimo():
    cfg = SystemConfig.from_snr_db(9.0, n_t=4, n_r=3, n_e=2, n_s=8, r_s=1.0)
    return cfg, random_channels(cfg, 11)


def unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)
