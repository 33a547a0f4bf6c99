import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gammacomb import CombConfig, PulseSpec, preset, pulse_on_grid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

NS = 1e-9


@pytest.fixture(scope="session")
def fe57():
    return preset("Fe57")


@pytest.fixture(scope="session")
def fig2a_config(fe57):
    return CombConfig(fe57, 5, 41.3, 3.075e-3)


@pytest.fixture(scope="session")
def gauss7():
    """7 ns Gaussian on a 0.14 ns grid reaching 120 ns."""
    return pulse_on_grid(PulseSpec.gaussian(7 * NS), 7 * NS / 50, 120 * NS)


def rel_l2(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def small_comb(fe57, m=5, zeta0=8.0, t0_ns=40.0):
    bw = 2 * math.pi / (t0_ns * NS)
    return CombConfig(fe57, m, zeta0, 1.0).with_tooth_spacing(bw)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
