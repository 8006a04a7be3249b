import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from mzi_twophase import PhasePair, make_probe  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ALPHA2_FIG2 = np.sqrt(10.0)
R_FIG2 = 1.7
TRUTH = PhasePair(0.7, 1.1)


@pytest.fixture
def fig2_probe():
    return make_probe(0.0, ALPHA2_FIG2, R_FIG2)


@pytest.fixture
def truth():
    return TRUTH


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    RESULTS = module.RESULTS
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, line = RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {line}")
