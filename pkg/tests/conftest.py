import numpy as np
import pytest

from iondirac.core import make_grid, params_for_compton, params_from_lab

_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def grid():
    return make_grid()


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(256, (-20.0, 20.0))


@pytest.fixture(scope="session")
def massless():
    return params_from_lab()


@pytest.fixture(scope="session")
def lc12():
    return params_for_compton(1.2)


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL verdict shown in the terminal summary."""

    def record(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)


def random_state(grid, rng, n_modes=3):
    """Sum of a few random Gaussian packets with random spinors, normalized."""
    from iondirac.core import SpinorField

    x = grid.x
    up = np.zeros(grid.n_points, complex)
    lo = np.zeros(grid.n_points, complex)
    for _ in range(n_modes):
        x0, p0, w = rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(0.8, 2.0)
        env = np.exp(-((x - x0) ** 2) / (4 * w * w) + 1j * p0 * x)
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        up += a * env
        lo += b * env
    return SpinorField(grid, up, lo).normalized()
