import sys

import numpy as np
import pytest
from hypothesis import settings

from graphnce import EtaSpec, build_graph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def two_node():
    """Points 0 and 1, masses (1/2, 1/2), eta = 1: the module-wide worked example."""
    return build_graph([[0.0], [1.0]], [0.5, 0.5], EtaSpec.constant(1.0))


@pytest.fixture
def path3():
    return build_graph([[0.0], [1.0], [2.0]], [1.0, 1.0, 1.0], EtaSpec.indicator(1.5))


def random_points(rng, n, d):
    return rng.uniform(0.0, 1.0, (n, d))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
