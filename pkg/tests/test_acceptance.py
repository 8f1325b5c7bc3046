"""Acceptance criteria, one test per criterion.

Each test records a single ``[PASS]``/``[FAIL]`` line that is echoed in the
pytest terminal summary. The module also runs standalone:
``python tests/test_acceptance.py``.
"""

import contextlib
import io
import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from gswap import core, measurements, swapping
from gswap.cli import main as cli_main
from gswap.linalg import symplectic_defect, symplectic_form
from gswap.optomech import OptomechParams, drift_matrix, initial_cm, propagate, propagator
from gswap.protocol import (
    DEFAULT_TEMPERATURES,
    Strategy,
    decoherence_time,
    detection_variances,
    default_time_grid,
    run_strategy,
    swapped_state,
    sweep,
)

RESULTS = {}
OP = OptomechParams.operating_point()
GRID = default_time_grid()


def record(key, ok, detail):
    RESULTS[key] = f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}"
    return ok


def _peaks(strategy):
    start = time.perf_counter()
    results = sweep(OP, GRID, DEFAULT_TEMPERATURES, strategy)
    return results, time.perf_counter() - start


def check_fig2a():
    results, elapsed = _peaks(Strategy.NON_ASSISTED)
    peaks = [r.peak() for r in results]
    ok = elapsed < 10.0
    parts = []
    for r, p in zip(results, peaks):
        ok &= abs(p.log_negativity - 0.88) <= 0.09 and abs(p.t - 0.8e-6) <= 0.15e-6
        parts.append(f"T={r.temperature:g}K E_N={p.log_negativity:.4f}@{p.t * 1e6:.3f}us")
    spread = max(p.log_negativity for p in peaks) - min(p.log_negativity for p in peaks)
    ok &= spread <= 0.01
    return record("C1 non-assisted peak", ok,
                  "; ".join(parts) + f"; spread {spread:.2e}; {elapsed:.2f}s")


def check_fig2b():
    assisted, _ = _peaks(Strategy.ASSISTED)
    plain, _ = _peaks(Strategy.NON_ASSISTED)
    ok = True
    parts = []
    for r in assisted:
        p = r.peak()
        ok &= abs(p.log_negativity - 1.1) <= 0.11 and abs(p.t - 1e-6) <= 0.2e-6
        parts.append(f"T={r.temperature:g}K E_N={p.log_negativity:.4f}@{p.t * 1e6:.3f}us")
    worst = max(
        float(np.max(b.column("eta_minus") - a.column("eta_minus"))) for a, b in zip(plain, assisted)
    )
    ok &= worst <= 1e-9
    return record("C2 assisted peak", ok,
                  "; ".join(parts) + f"; max(eta_assisted - eta_plain) {worst:.2e}")


def check_decoherence():
    # the lifetime is quoted for the non-assisted optimum
    grid_peak = sweep(OP, GRID, [0.0], Strategy.NON_ASSISTED)[0].peak()
    eta = grid_peak.eta_minus
    hot = decoherence_time(OP.at_temperature(300.0).n_bar, eta, OP.gamma_m)
    cold = decoherence_time(OP.at_temperature(1.0).n_bar, eta, OP.gamma_m)
    zero = decoherence_time(0.0, eta, OP.gamma_m)
    ok_hot = abs(hot / 3e-6 - 1) <= 0.15
    ok_cold = abs(cold / 1e-3 - 1) <= 0.15
    ok_zero = abs(zero - 1.0 / OP.gamma_m) <= 1e-12
    return record(
        "C3 decoherence times", ok_hot and ok_cold and ok_zero,
        f"eta={eta:.4f}: 300K {hot * 1e6:.3f}us ({'ok' if ok_hot else 'outside 3us+-15%'}), "
        f"1K {cold * 1e3:.4f}ms ({'ok' if ok_cold else 'outside 1ms+-15%'}), "
        f"T->0 {zero:.15g}s ({'ok' if ok_zero else 'bad'})",
    )


def check_oracles(cases=1000):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    swap_worst = 0.0
    for _ in range(cases):
        V_ac, V_bc = core.random_physical_cm(rng, 2), core.random_physical_cm(rng, 2)
        closed = swapping.swap_general(swapping.SwapInputs.from_matrices(V_ac, V_bc))
        joint = core.tensor(core.GaussianState(V_ac), core.GaussianState(V_bc))
        brute = measurements.bell_measurement(joint, 1, 3).cm
        swap_worst = max(swap_worst, float(np.max(np.abs(closed - brute))))
    eta_worst = 0.0
    for _ in range(cases):
        nf, _ = core.normal_form(core.random_physical_cm(rng, 2))
        eta_minus, eta_plus = swapping.eta_io(nf)
        direct_plus, direct_minus = core.pt_symplectic_eigenvalues(swapping.swap_symmetric(nf))
        eta_worst = max(eta_worst, abs(eta_minus - direct_minus), abs(eta_plus - direct_plus))
    elapsed = time.perf_counter() - start
    ok = swap_worst <= 1e-9 and eta_worst <= 1e-9 and elapsed < 30
    return record("C4 oracle equivalence", ok,
                  f"swap {swap_worst:.2e}, eta_io {eta_worst:.2e} over {cases}+{cases} cases; {elapsed:.2f}s")


def check_eigen(cases=1000):
    rng = np.random.default_rng(5)
    L = core.PT_SECOND
    J = symplectic_form(2)
    pt_worst = nf_worst = 0.0
    det = np.linalg.det
    for _ in range(cases):
        V = core.random_physical_cm(rng, 2)
        eta_plus, eta_minus = core.pt_symplectic_eigenvalues(V)
        moduli = np.sort(np.abs(np.linalg.eigvals(1j * J @ L @ V @ L)))
        pt_worst = max(pt_worst, abs(eta_plus - moduli[3]), abs(eta_minus - moduli[0]))
        nf, _ = core.normal_form(V)
        W = nf.matrix()
        before, after = core.TwoModeBlocks.from_matrix(V), core.TwoModeBlocks.from_matrix(W)
        diffs = [det(after.A) - det(before.A), det(after.C) - det(before.C), det(after.D) - det(before.D)]
        diffs += list(np.subtract(core.pt_symplectic_eigenvalues(W), (eta_plus, eta_minus)))
        nf_worst = max(nf_worst, float(np.max(np.abs(diffs))))
    return record("C5 eigenvalue correctness", pt_worst <= 1e-9 and nf_worst <= 1e-9,
                  f"PT vs dense {pt_worst:.2e}, normal_form invariants {nf_worst:.2e} over {cases} CMs")


def check_physics():
    purity = max(
        float(np.max(np.abs(core.symplectic_eigenvalues(propagate(OP, t).cm) - 0.5)))
        for t in np.linspace(0.0, 3e-6, 100)
    )
    sympl = max(symplectic_defect(propagator(OP, t)) for t in np.linspace(0.0, 3e-6, 100))
    ode = 0.0
    for T in DEFAULT_TEMPERATURES:
        p = OP.at_temperature(T)
        K = drift_matrix(p)
        for t in (0.5e-6, 1.5e-6, 3e-6):
            sol = solve_ivp(lambda _, y: (K @ y.reshape(6, 6) + y.reshape(6, 6) @ K.T).ravel(),
                            (0.0, t), initial_cm(p.n_bar).ravel(), method="DOP853",
                            rtol=1e-13, atol=1e-14)
            V_ode = sol.y[:, -1].reshape(6, 6)
            ode = max(ode, float(np.max(np.abs(propagate(p, t).cm - V_ode)) / np.max(np.abs(V_ode))))
    ok = purity <= 1e-9 and sympl <= 1e-10 and ode <= 1e-8
    return record("C6 physics invariants", ok,
                  f"purity {purity:.2e}, symplectic defect {sympl:.2e}, expm vs ODE {ode:.2e}")


def check_detection():
    worst_rel = worst_sym = 0.0
    for strategy in Strategy:
        for result in sweep(OP, GRID, DEFAULT_TEMPERATURES, strategy):
            p = result.params
            for row in result.rows:
                worst_rel = max(worst_rel, abs(row.xrel_variance - 2 * row.eta_minus))
                xrel, ptot = detection_variances(swapped_state(p, row.t, strategy))
                worst_sym = max(worst_sym, abs(xrel - ptot))
    return record("C7 detection relation", worst_rel <= 1e-9 and worst_sym <= 1e-9,
                  f"|xrel - 2 eta| {worst_rel:.2e}, |Var(x-) - Var(p+)| {worst_sym:.2e}")


def check_cli(tmp_dir):
    tmp_dir = Path(tmp_dir)
    config = tmp_dir / "cfg.json"
    config.write_text(json.dumps({"strategy": "assisted", "temperatures": [0, 0.005, 300]}))
    outputs = []
    for name in ("run1.csv", "run2.csv"):
        path = tmp_dir / name
        code = cli_main(["sweep", "--preset", "paper-fig2", "--config", str(config), "--output", str(path)])
        outputs.append((code, path.read_bytes()))
    identical = outputs[0][1] == outputs[1][1] and outputs[0][0] == outputs[1][0] == 0
    validate_code = cli_main(["validate"])
    return record("C8 CLI determinism", identical and validate_code == 0,
                  f"sweep outputs {'identical' if identical else 'DIFFER'} "
                  f"({len(outputs[0][1])} bytes); validate exit {validate_code}")


def test_c1_fig2a_peak():
    assert check_fig2a(), RESULTS["C1 non-assisted peak"]


def test_c2_fig2b_peak_and_dominance():
    assert check_fig2b(), RESULTS["C2 assisted peak"]


def test_c3_decoherence_times():
    assert check_decoherence(), RESULTS["C3 decoherence times"]


def test_c4_oracle_equivalence():
    assert check_oracles(), RESULTS["C4 oracle equivalence"]


def test_c5_eigenvalue_correctness():
    assert check_eigen(), RESULTS["C5 eigenvalue correctness"]


def test_c6_physics_invariants():
    assert check_physics(), RESULTS["C6 physics invariants"]


def test_c7_detection_relation():
    assert check_detection(), RESULTS["C7 detection relation"]


def test_c8_cli_determinism(tmp_path, capsys):
    ok = check_cli(tmp_path)
    capsys.readouterr()
    assert ok, RESULTS["C8 CLI determinism"]


if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        checks = [check_fig2a, check_fig2b, check_decoherence, check_oracles,
                  check_eigen, check_physics, check_detection, lambda: check_cli(tmp)]
        for check in checks:
            with contextlib.redirect_stdout(io.StringIO()):
                check()
    for line in RESULTS.values():
        print(line)
    sys.exit(0 if all(line.startswith("[PASS]") for line in RESULTS.values()) else 1)
