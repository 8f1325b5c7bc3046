"""Gaussian conditional measurements and linear optics.

All updates return the conditional state of the unmeasured modes. Covariance
matrices do not depend on the measurement record; when ``outcome`` is omitted
the record is taken equal to its mean, which leaves the displacement of the
kept modes unchanged.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import GaussianState, apply_symplectic, embed
from .errors import EmptyStateError, InvalidInputError, NumericalDomainError
from .linalg import I2, pinv_symmetric

QUADRATURES = ("x", "p")
HETERODYNE_COND_LIMIT = 1e12


@dataclass(frozen=True)
class MeasurementOutcomeModel:
    """Which quadratures of which modes are measured, and optionally the record.

    ``projector`` is diagonal over the ``2 * len(measured_modes)`` quadratures
    of the measured modes.
    """

    measured_modes: Tuple[int, ...]
    projector: np.ndarray
    outcome: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not self.measured_modes:
            raise InvalidInputError("measured_modes must be nonempty")
        P = np.asarray(self.projector, dtype=float)
        if not (np.array_equal(P, np.diag(np.diag(P))) and np.array_equal(P @ P, P)):
            raise InvalidInputError("projector must be diagonal and idempotent")
        object.__setattr__(self, "projector", P)

    @classmethod
    def homodyne(cls, mode: int, quadrature: str, outcome: Optional[float] = None):
        q = _quadrature_index(quadrature)
        P = np.zeros((2, 2))
        P[q, q] = 1.0
        vec = None
        if outcome is not None:
            vec = np.zeros(2)
            vec[q] = outcome
        return cls((mode,), P, vec)


def _quadrature_index(quadrature: str) -> int:
    try:
        return QUADRATURES.index(quadrature)
    except ValueError:
        raise InvalidInputError(f"quadrature must be 'x' or 'p', got {quadrature!r}") from None


def beam_splitter_symplectic(transmissivity: float) -> np.ndarray:
    r"""Two-mode beam splitter acting identically on the x and p quadratures.

    Output modes are :math:`\sqrt{\tau}\,1 + \sqrt{1-\tau}\,2` and
    :math:`\sqrt{\tau}\,2 - \sqrt{1-\tau}\,1`; at :math:`\tau = 1/2` these are the
    sum and difference ports.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise InvalidInputError(f"transmissivity must lie in [0, 1], got {transmissivity}")
    t, r = math.sqrt(transmissivity), math.sqrt(1.0 - transmissivity)
    return np.block([[t * I2, r * I2], [-r * I2, t * I2]])


def _split(state: GaussianState, mode: int):
    n = state.n_modes
    if not 0 <= mode < n:
        raise InvalidInputError(f"mode index {mode} out of range for {n} modes")
    if n == 1:
        raise EmptyStateError("cannot measure the only mode of a state")
    meas = np.array([2 * mode, 2 * mode + 1])
    keep = np.array([i for i in range(2 * n) if i // 2 != mode])
    V = state.cm
    labels = None
    if state.labels is not None:
        labels = tuple(l for k, l in enumerate(state.labels) if k != mode)
    return (
        V[np.ix_(keep, keep)],
        V[np.ix_(meas, meas)],
        V[np.ix_(keep, meas)],
        state.displacement[keep],
        state.displacement[meas],
        labels,
    )


def homodyne_update(
    state: GaussianState, mode: int, quadrature: str, outcome: Optional[float] = None
) -> GaussianState:
    """Condition on an ideal homodyne measurement of one quadrature of ``mode``.

    The kept-mode CM is ``A - C (P B P)^+ C^T``.
    """
    A, B, C, dA, dB, labels = _split(state, mode)
    model = MeasurementOutcomeModel.homodyne(mode, quadrature, outcome)
    P = model.projector
    gain = C @ pinv_symmetric(P @ B @ P)
    V = A - gain @ C.T
    d = dA
    if model.outcome is not None:
        d = dA + gain @ (P @ (model.outcome - dB))
    return GaussianState(0.5 * (V + V.T), d, labels)


def heterodyne_update(
    state: GaussianState, mode: int, outcome: Optional[Sequence[float]] = None
) -> GaussianState:
    """Condition on a heterodyne (double-homodyne) measurement of ``mode``.

    The kept-mode CM is ``A - C (B + I/2)^-1 C^T``. ``outcome`` is the
    ``(x, p)`` record scaled to the mode's quadrature units.
    """
    A, B, C, dA, dB, labels = _split(state, mode)
    M = B + 0.5 * I2
    cond = np.linalg.cond(M)
    if not cond < HETERODYNE_COND_LIMIT:
        raise NumericalDomainError(f"B + I/2 is ill-conditioned (cond {cond:.3e})")
    gain = C @ np.linalg.inv(M)
    V = A - gain @ C.T
    d = dA
    if outcome is not None:
        d = dA + gain @ (np.asarray(outcome, dtype=float) - dB)
    return GaussianState(0.5 * (V + V.T), d, labels)


def bell_measurement(
    state: GaussianState,
    mode1: int,
    mode2: int,
    outcome: Optional[Tuple[float, float]] = None,
) -> GaussianState:
    """Continuous-variable Bell measurement on ``mode1`` and ``mode2``.

    The modes are mixed on a balanced beam splitter; ``x`` is homodyned on the
    difference port ``(2 - 1)/sqrt(2)`` and ``p`` on the sum port
    ``(1 + 2)/sqrt(2)``. ``outcome`` is the ``(x_minus, p_plus)`` record.
    Returns the conditional state of the remaining modes in their original
    order.
    """
    n = state.n_modes
    if mode1 == mode2:
        raise InvalidInputError("Bell measurement needs two distinct modes")
    for m in (mode1, mode2):
        if not 0 <= m < n:
            raise InvalidInputError(f"mode index {m} out of range for {n} modes")
    if n < 3:
        raise EmptyStateError("Bell measurement would leave no unmeasured modes")

    S = embed(beam_splitter_symplectic(0.5), (mode1, mode2), n)
    mixed = apply_symplectic(state, S)
    x_rec, p_rec = (None, None) if outcome is None else outcome
    after_x = homodyne_update(mixed, mode2, "x", x_rec)
    sum_port = mode1 if mode1 < mode2 else mode1 - 1
    return homodyne_update(after_x, sum_port, "p", p_rec)


def unit_gain_correction(
    state: GaussianState, mode: int, outcome: Tuple[float, float]
) -> GaussianState:
    """Feed a Bell record forward to ``mode`` with unit gain.

    Shifts ``x`` by ``-sqrt(2) x_minus`` and ``p`` by ``+sqrt(2) p_plus``; the
    CM is unchanged.
    """
    if not 0 <= mode < state.n_modes:
        raise InvalidInputError(f"mode index {mode} out of range")
    x_minus, p_plus = outcome
    d = state.displacement.copy()
    d[2 * mode] -= math.sqrt(2.0) * x_minus
    d[2 * mode + 1] += math.sqrt(2.0) * p_plus
    return GaussianState(state.cm, d, state.labels)
