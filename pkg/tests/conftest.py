import numpy as np
import pytest

from qkls.bench import make_instance
from qkls.statevector import normalize


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


@pytest.fixture(scope="session")
def ising4():
    """Calibrated n=4 Ising instance at kappa = 27.6."""
    return make_instance(4, 0.1, 27.6)


@pytest.fixture(scope="session")
def ising10():
    return make_instance(10, 0.1, 27.6)


def random_state(rng, n):
    return normalize(rng.normal(size=2**n) + 1j * rng.normal(size=2**n))


PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def report(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
