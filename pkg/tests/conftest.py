import os

import mpmath
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ramif.expansion import QExpansion

settings.register_profile("ramif", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ramif"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cache(tmp_path, monkeypatch):
    monkeypatch.setenv("RAMIF_CACHE", str(tmp_path / "cache"))
    return tmp_path / "cache"


def close(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol
