import numpy as np
import pytest

from rfspin import Lattice, ModelParams
from rfspin.engines import ExactEnum, GaussianAnalytic
from rfspin.model import GaussianMass


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical suites")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def ising_chain():
    return ExactEnum(ModelParams(0.7, 1.0), Lattice(1, 4))


@pytest.fixture
def gaussian_2d():
    return GaussianAnalytic(ModelParams(0.5, 0.8, N=2, measure=GaussianMass(6.0)), Lattice(2, 4))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Record one ``PASS``/``FAIL`` line; all lines are repeated in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def log(number, ok, title, detail):
        line = f"[acceptance {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
