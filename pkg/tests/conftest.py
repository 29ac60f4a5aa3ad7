import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualiop import presets, signals
from dualiop.simulate import simulate

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def K():
    return presets.benchmark_controller()


@pytest.fixture(scope="session")
def clean_d10():
    """Noise-free benchmark data on a d = 10 PRBS: ``(r, u, y)``."""
    r = signals.prbs(signals.PrbsSpec(10))
    u, y = simulate(presets.benchmark_plant(), r, np.zeros_like(r))
    return r, u, y


@pytest.fixture(scope="session")
def noisy_d10():
    r = signals.prbs(signals.PrbsSpec(10))
    e = signals.gaussian(r.shape[0], 1, 1.0, 7)
    u, y = simulate(presets.benchmark_plant(), r, e)
    return r, u, y


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)
