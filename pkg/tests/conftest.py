from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_kraus(rng, d, r):
    """Independent sampler for oracles: normalize sum K^dag K by its inverse square root."""
    ks = rng.standard_normal((r, d, d)) + 1j * rng.standard_normal((r, d, d))
    s = sum(k.conj().T @ k for k in ks)
    w, v = np.linalg.eigh(s)
    m = v @ np.diag(w**-0.5) @ v.conj().T
    return [k @ m for k in ks]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.acceptance_lines():
        terminalreporter.write_line(line)
