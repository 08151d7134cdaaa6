import numpy as np
import pytest

from compols.core import DensityBounds, seeded_rng


@pytest.fixture
def rng():
    return seeded_rng(12345)


@pytest.fixture
def b20():
    return DensityBounds.from_gamma(20.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, summary_line
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(summary_line(n))
