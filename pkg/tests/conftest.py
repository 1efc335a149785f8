import os

import hypothesis
import numpy as np
import pytest

from balmix.data import generate_longtail

hypothesis.settings.register_profile("default", deadline=None, max_examples=100)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

LONGTAIL_COUNTS = [2000, 632, 200, 63, 20]


@pytest.fixture(scope="session")
def longtail():
    return generate_longtail(K=5, dim=2, n_max=2000, imbalance_ratio=100.0, noise_sigma=0.7, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid and "criterion" in report.nodeid:
        _criteria.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
