"""Seeded oracle-equivalence and invariant checks, run by ``gswap validate``.

Every property draws case ``i`` from ``numpy.random.default_rng(seed + i)``,
so a failure is reproducible from the reported seed alone.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import core, measurements, optomech, swapping
from .linalg import symplectic_defect, symplectic_form


@dataclass
class PropertyReport:
    name: str
    cases: int
    tolerance: float
    worst: float = 0.0
    failing_seed: Optional[int] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failing_seed is None and self.error is None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: {self.cases} cases, worst {self.worst:.3e} (tol {self.tolerance:.0e})"
        if self.failing_seed is not None:
            text += f", failing seed {self.failing_seed}"
        if self.error:
            text += f", {self.error}"
        return text


def _random_pair_state(rng):
    V_ac = core.random_physical_cm(rng, 2)
    V_bc = core.random_physical_cm(rng, 2)
    return V_ac, V_bc


def swap_oracle_residual(rng) -> float:
    """Closed-form swap against BS + dual homodyne on modes ``(a, c1, b, c2)``."""
    V_ac, V_bc = _random_pair_state(rng)
    closed = swapping.swap_general(swapping.SwapInputs.from_matrices(V_ac, V_bc))
    joint = core.tensor(core.GaussianState(V_ac), core.GaussianState(V_bc))
    brute = measurements.bell_measurement(joint, 1, 3).cm
    return float(np.max(np.abs(closed - brute)))


def eta_io_residual(rng) -> float:
    nf, _ = core.normal_form(core.random_physical_cm(rng, 2))
    eta_minus, eta_plus = swapping.eta_io(nf)
    direct_plus, direct_minus = core.pt_symplectic_eigenvalues(swapping.swap_symmetric(nf))
    return max(abs(eta_minus - direct_minus), abs(eta_plus - direct_plus))


def pt_eigen_residual(rng) -> float:
    V = core.random_physical_cm(rng, 2)
    eta_plus, eta_minus = core.pt_symplectic_eigenvalues(V)
    L = core.PT_SECOND
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(2) @ L @ V @ L)))
    dense_minus, dense_plus = 0.5 * (moduli[0] + moduli[1]), 0.5 * (moduli[2] + moduli[3])
    return max(abs(eta_plus - dense_plus), abs(eta_minus - dense_minus)) / max(1.0, dense_plus)


def normal_form_residual(rng) -> float:
    V = core.random_physical_cm(rng, 2)
    nf, (S_a, S_c) = core.normal_form(V)
    W = nf.matrix()
    before = core.TwoModeBlocks.from_matrix(V)
    after = core.TwoModeBlocks.from_matrix(W)

    def rel(x, y):
        return abs(x - y) / max(1.0, abs(y))

    det = np.linalg.det
    defects = [
        rel(det(after.A), det(before.A)),
        rel(det(after.C), det(before.C)),
        rel(det(after.D), det(before.D)),
        rel(det(W), det(V)),
        symplectic_defect(S_a),
        symplectic_defect(S_c),
    ]
    for x, y in zip(core.pt_symplectic_eigenvalues(W), core.pt_symplectic_eigenvalues(V)):
        defects.append(rel(x, y))
    return max(defects)


def _random_params(rng) -> optomech.OptomechParams:
    chi = 10 ** rng.uniform(5.0, 7.0)
    r = 1.0 + 10 ** rng.uniform(-7.0, -1.0)
    return optomech.OptomechParams(chi=chi, theta=r * chi, omega_m=5e8)


def purity_residual(rng) -> float:
    """All global symplectic eigenvalues stay 1/2 at T = 0."""
    params = optomech.OptomechParams.operating_point()
    t = rng.uniform(0.0, 3e-6)
    nu = core.symplectic_eigenvalues(optomech.propagate(params, t).cm)
    return float(np.max(np.abs(nu - 0.5)))


def propagator_symplectic_residual(rng) -> float:
    params = _random_params(rng)
    t = rng.choice([0.1, 1.0, 10.0]) / params.chi
    return symplectic_defect(optomech.propagator(params, t))


def ode_residual(rng) -> float:
    """Matrix exponential against adaptive integration of dV/dt = K V + V K^T."""
    params = optomech.OptomechParams.operating_point(temperature=rng.choice([0.0, 5e-3, 300.0]))
    t = rng.uniform(0.2e-6, 3e-6)
    K = optomech.drift_matrix(params)
    V0 = optomech.initial_cm(params.n_bar)

    def rhs(_, y):
        V = y.reshape(6, 6)
        return (K @ V + V @ K.T).ravel()

    sol = solve_ivp(rhs, (0.0, t), V0.ravel(), method="DOP853", rtol=1e-13, atol=1e-14)
    V_ode = sol.y[:, -1].reshape(6, 6)
    V_exp = optomech.propagate(params, t).cm
    return float(np.max(np.abs(V_exp - V_ode)) / np.max(np.abs(V_ode)))


# name -> (check, tolerance, share of the requested case count)
PROPERTIES: Dict[str, tuple] = {
    "swap_general == bell_measurement oracle": (swap_oracle_residual, 1e-9, 1.0),
    "eta_io == PT eigenvalues of swap_symmetric": (eta_io_residual, 1e-9, 1.0),
    "closed-form PT eigenvalues == dense eigensolver": (pt_eigen_residual, 1e-9, 1.0),
    "normal_form preserves invariants": (normal_form_residual, 1e-9, 1.0),
    "global purity at T=0": (purity_residual, 1e-9, 1.0),
    "e^{Kt} symplectic": (propagator_symplectic_residual, 1e-10, 1.0),
    "expm == ODE integration": (ode_residual, 1e-8, 0.1),
}


def run_property(name: str, check: Callable, tol: float, seed: int, cases: int) -> PropertyReport:
    report = PropertyReport(name, cases, tol)
    for i in range(cases):
        case_seed = seed + i
        try:
            value = check(np.random.default_rng(case_seed))
        except Exception as exc:  # a crash is a failure of the property
            report.failing_seed = case_seed
            report.error = f"{type(exc).__name__}: {exc}"
            break
        report.worst = max(report.worst, value)
        if not value <= tol:
            report.failing_seed = case_seed
            break
    return report


def run_all(seed: int = 0, cases: int = 100) -> List[PropertyReport]:
    reports = []
    for name, (check, tol, share) in PROPERTIES.items():
        n = max(1, int(round(cases * share)))
        reports.append(run_property(name, check, tol, seed, n))
    return reports
