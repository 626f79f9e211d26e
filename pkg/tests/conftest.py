import numpy as np
import pytest

from sineqpe import kernels
from sineqpe._accel import HAVE_NUMBA

ACCEPTANCE_RESULTS = []

STREAM_BACKENDS = [pytest.param(kernels.stream_trials_numpy, id="numpy")]
if HAVE_NUMBA:
    STREAM_BACKENDS.append(pytest.param(kernels.stream_trials_numba, id="numba"))


class Replay:
    """Stand-in generator that hands out a fixed list of uniforms."""

    def __init__(self, draws):
        self._draws = list(draws)
        self._i = 0

    def random(self):
        value = self._draws[self._i]
        self._i += 1
        return value


def random_state(rng, num_qubits):
    v = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
