import numpy as np
import pytest

from pagewootters.clock import make_cyclic_clock
from pagewootters.linalg import SX


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qubit_h():
    return SX / 2


@pytest.fixture
def on_grid_clock():
    """32 readings over 4 pi: the spectrum of sigma_x / 2 sits on the frequency grid."""
    return make_cyclic_clock(32, 0.0, 4 * np.pi / 32)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    lines = [RESULTS[k] for k in sorted(k for k in RESULTS if isinstance(k, int))]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines + RESULTS.get("info", []):
        terminalreporter.write_line(line)
