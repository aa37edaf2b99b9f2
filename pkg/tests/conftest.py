import numpy as np
import pytest

from stratiwave.model import AugmentedState, DensityRatios, State


def random_state(rng, n, u_scale=0.5, v_scale=0.5):
    h = rng.uniform(0.5, 2.0, n)
    return State(h, rng.uniform(-u_scale, u_scale, n), rng.uniform(-v_scale, v_scale, n))


def random_gamma(rng, n, lo=0.5, hi=0.99):
    return DensityRatios(rng.uniform(lo, hi, n - 1))


def random_aug(rng, n, f=0.0):
    return AugmentedState(random_state(rng, n), rng.uniform(-0.5, 0.5, n))


def multiset_gap(a, b):
    """Hausdorff distance between two finite multisets of complex numbers of equal size."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    """Store the outcome of an acceptance criterion for the terminal summary."""
    ACCEPTANCE[criterion] = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
