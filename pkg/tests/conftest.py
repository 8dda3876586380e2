import numpy as np
import pytest

from specord.grid import NotchSpec, SubcarrierGrid, paired_notches


@pytest.fixture(scope="session")
def lte_grid():
    return SubcarrierGrid.symmetric(2048, 300)


@pytest.fixture(scope="session")
def desk_grid():
    return SubcarrierGrid.symmetric(128, 32)


@pytest.fixture(scope="session")
def lte_notch():
    return NotchSpec(frequencies=paired_notches([5100e3, 6100e3], 1e3))


@pytest.fixture(scope="session")
def lte_band():
    return NotchSpec(bands=((-40e6, -5e6), (5e6, 40e6)), sample_spacing=200e3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class MacCounter:
    """Matmul stand-in that tallies complex multiply-adds."""

    def __init__(self):
        self.macs = 0

    def __call__(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        cols = 1 if b.ndim == 1 else b.shape[1]
        self.macs += a.shape[0] * a.shape[1] * cols
        return a @ b


@pytest.fixture
def mac_counter():
    return MacCounter()


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def _report(criterion, ok, detail):
        line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
