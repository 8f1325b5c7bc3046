"""Mechanical entanglement by swapping the optomechanical correlations.

Two identical oscillators are illuminated by identical pulses. Charlie
Bell-measures the two Stokes sidebands; the anti-Stokes sidebands are either
discarded (``NON_ASSISTED``) or heterodyned (``ASSISTED``).
"""

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    NormalFormBlocks,
    check_physicality,
    log_negativity,
    partial_trace,
    pt_symplectic_eigenvalues,
    tensor,
)
from .errors import (
    AsymmetricChannelWarning,
    GSwapError,
    InvalidInputError,
    ModelInconsistencyError,
    NotEntangledError,
)
from .measurements import bell_measurement, heterodyne_update
from .optomech import (
    ANTI_STOKES,
    MECHANICAL,
    STOKES,
    OptomechParams,
    ThreeModeState,
    extract_coefficients,
    propagate,
)
from .swapping import eta_io, swap_symmetric

logger = logging.getLogger(__name__)

SYMMETRY_WARN_TOL = 1e-6
DEFAULT_T_MAX = 3e-6
DEFAULT_T_STEPS = 512
DEFAULT_TEMPERATURES = (0.0, 5e-3, 300.0)


class Strategy(str, Enum):
    NON_ASSISTED = "non_assisted"
    ASSISTED = "assisted"


def heterodyned_stokes_mechanical(state: ThreeModeState) -> np.ndarray:
    """``(c, a)`` CM conditioned on heterodyning the anti-Stokes mode.

    At high temperature the Schur complement subtracts two O(n_bar) terms
    whose difference is O(1). With the propagator at hand the thermal part
    ``n_bar U U^T`` is instead carried through a Woodbury update, which
    involves no such cancellation.
    """
    keep, meas = np.arange(4), np.array([4, 5])
    split = state.thermal_split()
    if split is None or state.n_bar == 0.0:
        V = state.cm
        M = V[np.ix_(meas, meas)] + 0.5 * np.eye(2)
        X = V[np.ix_(keep, meas)]
        return V[np.ix_(keep, keep)] - X @ np.linalg.solve(M, X.T)
    V0, U = split
    M0 = V0[np.ix_(meas, meas)] + 0.5 * np.eye(2)
    X0 = V0[np.ix_(keep, meas)]
    gain = np.linalg.solve(M0, X0.T).T
    schur0 = V0[np.ix_(keep, keep)] - gain @ X0.T
    U_tilde = U[keep] - gain @ U[meas]
    inner = np.eye(2) / state.n_bar + U[meas].T @ np.linalg.solve(M0, U[meas])
    V = schur0 + U_tilde @ np.linalg.solve(inner, U_tilde.T)
    return 0.5 * (V + V.T)


def reduce_strategy(state: ThreeModeState, strategy: Strategy) -> NormalFormBlocks:
    """Mechanical-Stokes resource in standard form for the given strategy.

    Non-assisted: ``a = B + 1/2``, ``c = A + 1/2``, ``d = C``. Assisted:
    ``a = B + 1/2 - D^2/(E+1)``, ``c = A + 1/2 - F^2/(E+1)`` and
    ``d = C + D F/(E+1)``, evaluated through
    :func:`heterodyned_stokes_mechanical`. The cross scalar enters as
    ``d = -d' = |d|``; its overall sign is a local phase convention.
    """
    k = extract_coefficients(state)
    strategy = Strategy(strategy)
    if strategy is Strategy.NON_ASSISTED:
        a, c, d = k.B + 0.5, k.A + 0.5, k.C
    else:
        V = heterodyned_stokes_mechanical(state)
        a, c, d = V[2, 2], V[0, 0], V[0, 2]
    nf = NormalFormBlocks(a=a, c=c, d=abs(d), d_prime=-abs(d))
    if not nf.is_physical():
        raise ModelInconsistencyError(
            f"reduced resource violates the uncertainty principle at t={state.t!r}"
        )
    return nf


def swapped_state(params: OptomechParams, t: float, strategy: Strategy) -> np.ndarray:
    """CM of the two oscillators right after Charlie's measurements."""
    return swap_symmetric(reduce_strategy(propagate(params, t), strategy))


def run_strategy(params: OptomechParams, t: float, strategy: Strategy) -> Tuple[float, float]:
    """``(eta_minus, log_negativity)`` of the swapped mechanical state at time ``t``."""
    nf = reduce_strategy(propagate(params, t), strategy)
    eta_minus, _ = eta_io(nf)
    return eta_minus, log_negativity(eta_minus)


def run_strategy_bruteforce(
    params: OptomechParams, t: float, strategy: Strategy
) -> Tuple[float, float]:
    """Same as :func:`run_strategy` by explicit measurement on six modes.

    Two copies of the three-mode state are joined, the anti-Stokes modes are
    traced out or heterodyned, the Stokes modes are Bell-measured, and the
    PT eigenvalues of the remaining oscillators are computed directly.
    """
    single = propagate(params, t).as_gaussian()
    joint = tensor(single, single)
    if Strategy(strategy) is Strategy.ASSISTED:
        joint = heterodyne_update(joint, 3 + ANTI_STOKES)
        joint = heterodyne_update(joint, ANTI_STOKES)
    else:
        joint = partial_trace(joint, [STOKES, MECHANICAL, 3 + STOKES, 3 + MECHANICAL])
    # remaining order: (c1, a1, c2, a2)
    out = bell_measurement(joint, 0, 2)
    _, eta_minus = pt_symplectic_eigenvalues(out.cm)
    return eta_minus, log_negativity(eta_minus)


def decoherence_time(n_bar: float, eta_out_minus: float, gamma_m: float) -> float:
    r"""Lifetime of the swapped entanglement under thermal damping.

    .. math::

        \gamma^{-1} = \Gamma^{-1} \ln \frac{2\bar n + 1 - 2\eta}
                                            {2\bar n + e^{-1}(1 - 2\eta)}

    Tends to :math:`\Gamma^{-1}` as :math:`\bar n \to 0`.

    Raises:
        NotEntangledError: ``eta_out_minus >= 1/2``.
    """
    if n_bar < 0:
        raise InvalidInputError(f"n_bar must be nonnegative, got {n_bar}")
    if gamma_m <= 0:
        raise InvalidInputError(f"gamma_m must be positive, got {gamma_m}")
    if not 0.0 <= eta_out_minus < 0.5:
        raise NotEntangledError(f"eta_out_minus = {eta_out_minus} >= 1/2: no entanglement")
    margin = 1.0 - 2.0 * eta_out_minus
    # log1p form keeps precision when n_bar >> 1
    ratio_minus_one = margin * (1.0 - math.exp(-1.0)) / (2.0 * n_bar + math.exp(-1.0) * margin)
    return math.log1p(ratio_minus_one) / gamma_m


def detection_variances(v_out) -> Tuple[float, float]:
    """``(Var(x_a - x_b), Var(p_a + p_b))`` of a two-mode CM."""
    V = np.asarray(v_out, dtype=float)
    if V.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 CM, got {V.shape}")
    return V[0, 0] + V[2, 2] - 2 * V[0, 2], V[1, 1] + V[3, 3] + 2 * V[1, 3]


def xrel_variance(v_out) -> float:
    """Variance of the relative position ``x_a - x_b``.

    For the symmetric swap output this equals ``Var(p_a + p_b)`` and
    ``2 eta_minus``. Unequal local blocks trigger
    :class:`AsymmetricChannelWarning`; use :func:`detection_variances` then.
    """
    V = np.asarray(v_out, dtype=float)
    xrel, ptot = detection_variances(V)
    scale = max(1.0, float(np.max(np.abs(V))))
    if np.max(np.abs(V[:2, :2] - V[2:, 2:])) > SYMMETRY_WARN_TOL * scale:
        warnings.warn(
            f"asymmetric channel: Var(x_rel)={xrel!r}, Var(p_tot)={ptot!r}",
            AsymmetricChannelWarning,
            stacklevel=2,
        )
    return xrel


@dataclass(frozen=True)
class SweepRow:
    t: float
    eta_minus: float
    log_negativity: float
    xrel_variance: float
    decoherence_time: float
    error: Optional[str] = None


@dataclass
class SweepResult:
    """Entanglement-versus-time series for one strategy and one temperature.

    ``decoherence_time`` is NaN on rows without entanglement; rows whose
    evaluation failed carry NaNs and the message in ``error``.
    """

    params: OptomechParams
    strategy: Strategy
    temperature: float
    rows: List[SweepRow] = field(default_factory=list)

    @property
    def errors(self) -> List[SweepRow]:
        return [row for row in self.rows if row.error is not None]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])

    def peak(self) -> SweepRow:
        """Row with the largest log-negativity (earliest on ties)."""
        return max(self.rows, key=lambda row: (row.log_negativity, -row.t))

    def check(self, tol: float = 1e-9) -> None:
        """Re-validate the row-level invariants."""
        times = self.column("t")
        if np.any(np.diff(times) < 0):
            raise ModelInconsistencyError("sweep rows are not sorted by time")
        for row in self.rows:
            if row.error is not None:
                continue
            if abs(row.log_negativity - log_negativity(row.eta_minus)) > tol:
                raise ModelInconsistencyError(f"log-negativity mismatch at t={row.t!r}")
            if abs(row.xrel_variance - 2 * row.eta_minus) > tol:
                raise ModelInconsistencyError(f"x_rel variance mismatch at t={row.t!r}")


def evaluate_row(params: OptomechParams, t: float, strategy: Strategy) -> SweepRow:
    try:
        nf = reduce_strategy(propagate(params, t), strategy)
        eta_minus, _ = eta_io(nf)
        xrel = xrel_variance(swap_symmetric(nf))
        if eta_minus < 0.5:
            lifetime = decoherence_time(params.n_bar, eta_minus, params.gamma_m)
        else:
            lifetime = math.nan
        return SweepRow(t, eta_minus, log_negativity(eta_minus), xrel, lifetime)
    except GSwapError as exc:
        logger.warning("sweep row t=%r failed: %s", t, exc)
        nan = math.nan
        return SweepRow(t, nan, nan, nan, nan, error=f"{type(exc).__name__}: {exc}")


def default_workers() -> int:
    """Worker cap from ``GSWAP_THREADS`` (default 1)."""
    raw = os.environ.get("GSWAP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidInputError(f"GSWAP_THREADS must be an integer, got {raw!r}") from None


def default_time_grid(t_max: float = DEFAULT_T_MAX, steps: int = DEFAULT_T_STEPS) -> np.ndarray:
    return np.linspace(0.0, t_max, steps)


def sweep(
    params: OptomechParams,
    t_grid: Sequence[float],
    temperatures: Sequence[float],
    strategy: Strategy,
    workers: Optional[int] = None,
) -> List[SweepResult]:
    """One :class:`SweepResult` per temperature, rows in ascending time."""
    t_grid = sorted(float(t) for t in t_grid)
    if not t_grid or not len(temperatures):
        raise InvalidInputError("sweep needs nonempty time and temperature grids")
    strategy = Strategy(strategy)
    workers = default_workers() if workers is None else max(1, int(workers))

    results = []
    for temperature in temperatures:
        p = params.at_temperature(float(temperature))
        if workers == 1:
            rows = [evaluate_row(p, t, strategy) for t in t_grid]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda t: evaluate_row(p, t, strategy), t_grid))
        results.append(SweepResult(p, strategy, float(temperature), rows))
    return results
