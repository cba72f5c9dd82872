import sys

import numpy as np
import pytest

from hesskit import build_graph


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


@pytest.fixture
def triangle():
    return build_graph(3, [(1, 2), (2, 3), (1, 3)])


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
