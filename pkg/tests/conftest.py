import random
import sys

import pytest
from hypothesis import HealthCheck, settings

from rbpmc import figures
from rbpmc.reductions import tn_to_rb

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def pstar_q():
    return figures.pstar_q_template()


@pytest.fixture
def reset_broadcast():
    return figures.reset_broadcast_template()


@pytest.fixture
def swap_cycle():
    return figures.swap_cycle_template()


@pytest.fixture
def timed_tn():
    return figures.timed_example()


@pytest.fixture
def timed_rb():
    return tn_to_rb(figures.timed_example())


def figure_templates():
    out = dict(figures.all_templates())
    out["timed"] = tn_to_rb(figures.timed_example())
    return out


def rng_for(seed):
    return random.Random(seed)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
