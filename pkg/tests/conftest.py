import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from varqed.matter import EmitterSpec, solve_matter
from varqed.modes import CavityGeometry

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_line(request):
    """Record one pass/fail line for the terminal summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(ok, text):
        line = f"{'PASS' if ok else 'FAIL'}  {text}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def two_level():
    return solve_matter(EmitterSpec(2, (), -0.25))


@pytest.fixture(scope="session")
def four_level():
    return solve_matter(EmitterSpec(4, (0.3, -0.1, 0.2), -0.4))


@pytest.fixture
def unit_cavity():
    """First bare mode at 1 eV, emitter off-center."""
    return CavityGeometry(np.pi, 0.3 * np.pi, 0.2)
