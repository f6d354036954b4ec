import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mixedreg import MixtureModel, generate, make_model

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def model10():
    return make_model(10, radius=1.5, inner_product=1.73, seed=3)


@pytest.fixture
def unit_model():
    b1 = np.zeros(5)
    b1[0] = 1.0
    b2 = np.zeros(5)
    b2[0], b2[1] = 0.5, np.sqrt(0.75)
    return MixtureModel(b1, b2, 0.5, 0.5)


@pytest.fixture
def samples10(model10):
    return generate(model10, 300, seed=11)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[num])
