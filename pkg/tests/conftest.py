import numpy as np
import pytest

from minspan.bootstrap import rng_from
from minspan.panel import ReturnPanel
from minspan.simulation import SimConfig, simulate_var_garch


def make_panel(values, labels=None, prefix="p"):
    values = np.asarray(values, dtype=float)
    T, d = values.shape
    labels = labels or [f"A{j}" for j in range(d)]
    periods = [f"{prefix}{t:05d}" for t in range(T)]
    return ReturnPanel(values, tuple(labels), tuple(periods))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sim_panel():
    """Seeded (K, N) = (3, 5), T = 240 VAR-GARCH panel."""
    return simulate_var_garch(SimConfig(K=3, N=5, T=240), rng_from(7, 0))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
