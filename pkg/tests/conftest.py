import sys

import numpy as np
import pytest

from gswap import core
from gswap.linalg import symplectic_form


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dense_pt_eigenvalues(V):
    """PT symplectic eigenvalues from a generic complex eigensolver, (plus, minus)."""
    L = np.diag([1.0, 1.0, 1.0, -1.0])
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(2) @ L @ V @ L)))
    return moduli[3], moduli[0]


def schur_condition(V, keep, meas, meas_noise):
    """Brute-force Gaussian conditioning: V_kk - V_km (V_mm + N)^+ V_mk."""
    keep, meas = np.asarray(keep), np.asarray(meas)
    M = V[np.ix_(meas, meas)] + meas_noise
    return V[np.ix_(keep, keep)] - V[np.ix_(keep, meas)] @ np.linalg.pinv(M) @ V[np.ix_(meas, keep)]


def random_pair(rng):
    return core.random_physical_cm(rng, 2), core.random_physical_cm(rng, 2)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[key])
