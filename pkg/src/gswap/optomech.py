r"""Radiation-pressure coupling of a mechanical mode to its two optical sidebands.

The interaction

.. math::

    H/\hbar = -i\chi(a c - a^\dagger c^\dagger) - i\theta(a^\dagger c' - a c'^\dagger)

two-mode squeezes the mechanical mode ``a`` with the Stokes sideband ``c`` and
mixes it with the anti-Stokes sideband ``c'``. In quadratures the Heisenberg
equations are linear, ``d xi/dt = K xi``, so a Gaussian CM evolves as
``V(t) = e^{Kt} V(0) e^{K^T t}``. Mode order is ``(c, a, c')``.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import GaussianState, check_physicality
from .errors import InvalidInputError, StructureError
from .linalg import I2, R2, expm

# CODATA 2018
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

STOKES, MECHANICAL, ANTI_STOKES = 0, 1, 2
MODE_LABELS = ("stokes", "mechanical", "anti_stokes")
STRUCTURE_TOL = 1e-6


def thermal_occupancy(omega_m: float, temperature: float) -> float:
    """Bose-Einstein occupation ``1 / (exp(hbar Omega / k_B T) - 1)``; 0 at T = 0."""
    if omega_m <= 0:
        raise InvalidInputError(f"omega_m must be positive, got {omega_m}")
    if temperature < 0:
        raise InvalidInputError(f"temperature must be nonnegative, got {temperature}")
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega_m / (K_B * temperature))


@dataclass(frozen=True)
class OptomechParams:
    """Physical parameters of one oscillator illuminated by one pulse.

    Attributes:
        chi: Stokes coupling (1/s).
        theta: anti-Stokes coupling (1/s), at least ``chi``.
        omega_m: mechanical angular frequency (rad/s).
        temperature: bath temperature (K).
        gamma_m: mechanical damping rate (1/s); only enters lifetimes.
        omega_l: laser angular frequency (rad/s); when given, it must satisfy
            ``r^2 = (omega_l + omega_m) / (omega_l - omega_m)``.
    """

    chi: float
    theta: float
    omega_m: float
    temperature: float = 0.0
    gamma_m: float = 1.0
    omega_l: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("chi", "theta", "omega_m", "gamma_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive and finite, got {value}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise InvalidInputError(f"temperature must be nonnegative, got {self.temperature}")
        if self.theta ** 2 - self.chi ** 2 <= 0:
            raise InvalidInputError("theta must exceed chi (theta^2 - chi^2 > 0)")
        if self.omega_l is not None:
            if self.omega_l <= self.omega_m:
                raise InvalidInputError("omega_l must exceed omega_m")
            r_sq = (self.omega_l + self.omega_m) / (self.omega_l - self.omega_m)
            if abs(r_sq - self.r ** 2) > 1e-9 * r_sq:
                raise InvalidInputError(
                    f"omega_l implies r^2 = {r_sq!r}, couplings give {self.r ** 2!r}"
                )

    @classmethod
    def from_gap(
        cls,
        gap: float,
        r: float,
        omega_m: float,
        temperature: float = 0.0,
        gamma_m: float = 1.0,
    ) -> "OptomechParams":
        """Build from ``gap = (theta^2 - chi^2)^(1/2)`` and ``r = theta / chi``."""
        if not r > 1:
            raise InvalidInputError(f"r must exceed 1, got {r}")
        if not gap > 0:
            raise InvalidInputError(f"gap must be positive, got {gap}")
        chi = gap / math.sqrt(r * r - 1.0)
        return cls(chi=chi, theta=r * chi, omega_m=omega_m,
                   temperature=temperature, gamma_m=gamma_m)

    @classmethod
    def operating_point(cls, temperature: float = 0.0) -> "OptomechParams":
        """Operating point: gap 1e3 1/s, r = 1 + 2.5e-7, Omega = 5e8 rad/s, 1/Gamma = 1 s."""
        return cls.from_gap(1e3, 1.0 + 2.5e-7, 5e8, temperature=temperature, gamma_m=1.0)

    @property
    def r(self) -> float:
        return self.theta / self.chi

    @property
    def gap(self) -> float:
        """``(theta^2 - chi^2)^(1/2)``, the rate that sets the scaled time."""
        return math.sqrt((self.theta - self.chi) * (self.theta + self.chi))

    @property
    def laser_frequency(self) -> float:
        """Laser frequency consistent with ``r``: ``Omega (r^2 + 1) / (r^2 - 1)``."""
        r_sq = self.r ** 2
        return self.omega_m * (r_sq + 1.0) / (r_sq - 1.0)

    @property
    def n_bar(self) -> float:
        return thermal_occupancy(self.omega_m, self.temperature)

    def at_temperature(self, temperature: float) -> "OptomechParams":
        return replace(self, temperature=temperature)


@dataclass(frozen=True)
class SidebandCoefficients:
    """Scalars parameterizing the evolved three-mode CM::

        [[(A + 1/2) I,  C R,          F R       ],
         [C R,          (B + 1/2) I,  -D I      ],
         [F R,          -D I,         (E + 1/2) I]]
    """

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float

    def cm(self) -> np.ndarray:
        return np.block([
            [(self.A + 0.5) * I2, self.C * R2, self.F * R2],
            [self.C * R2, (self.B + 0.5) * I2, -self.D * I2],
            [self.F * R2, -self.D * I2, (self.E + 0.5) * I2],
        ])


@dataclass(frozen=True)
class ThreeModeState:
    """Evolved ``(c, a, c')`` state at time ``t`` (s).

    ``scaled_time`` is ``t (theta^2 - chi^2)^(1/2)``. When ``propagator`` is
    known the CM splits as ``S S^T / 2 + n_bar U U^T`` with ``U`` the two
    mechanical columns of ``S``; see :meth:`thermal_split`.
    """

    cm: np.ndarray
    t: float
    scaled_time: float
    n_bar: float
    propagator: Optional[np.ndarray] = None

    def thermal_split(self):
        """``(V_vacuum, U)`` with ``cm == V_vacuum + n_bar U U^T``, or None."""
        if self.propagator is None:
            return None
        S = self.propagator
        return 0.5 * S @ S.T, S[:, 2 * MECHANICAL:2 * MECHANICAL + 2]

    def as_gaussian(self) -> GaussianState:
        return GaussianState(self.cm, labels=MODE_LABELS)

    def is_physical(self) -> bool:
        return check_physicality(self.cm)


def drift_matrix(params: OptomechParams) -> np.ndarray:
    """Heisenberg drift ``K`` with ``d xi / dt = K xi`` in ``(c, a, c')`` order.

    From the Hamiltonian: ``dc/dt = chi a^dag``, ``da/dt = chi c^dag - theta c'``
    and ``dc'/dt = theta a``.
    """
    return coupling_drift(params.chi, params.theta)


def coupling_drift(chi: float, theta: float) -> np.ndarray:
    """Drift for raw couplings; either may be zero (pure squeezing or pure mixing)."""
    xc, pc, xa, pa, xs, ps = range(6)
    K = np.zeros((6, 6))
    K[xc, xa] = chi
    K[pc, pa] = -chi
    K[xa, xc] = chi
    K[pa, pc] = -chi
    K[xa, xs] = -theta
    K[pa, ps] = -theta
    K[xs, xa] = theta
    K[ps, pa] = theta
    return K


def initial_cm(n_bar: float) -> np.ndarray:
    """Vacuum sidebands and a thermal mechanical mode."""
    return np.diag([0.5, 0.5, n_bar + 0.5, n_bar + 0.5, 0.5, 0.5])


def propagator(params: OptomechParams, t: float) -> np.ndarray:
    """Symplectic ``e^{K t}``."""
    if not t >= 0:
        raise InvalidInputError(f"t must be nonnegative, got {t}")
    return expm(drift_matrix(params) * t)


def propagate(params: OptomechParams, t: float) -> ThreeModeState:
    """Evolve the initial product state for a time ``t`` (s) under the pulse."""
    n_bar = params.n_bar
    S = propagator(params, t)
    V = S @ initial_cm(n_bar) @ S.T
    V = 0.5 * (V + V.T)
    state = ThreeModeState(cm=V, t=float(t), scaled_time=t * params.gap, n_bar=n_bar,
                           propagator=S)
    structure_defect(state.cm, raise_above=STRUCTURE_TOL)
    return state


def structure_defect(V: np.ndarray, raise_above: Optional[float] = None) -> float:
    """Distance of ``V`` from the sideband block pattern, relative to ``max|V|``."""
    coeffs = _read_coefficients(V)
    scale = max(1.0, float(np.max(np.abs(V))))
    defect = float(np.max(np.abs(V - coeffs.cm()))) / scale
    if raise_above is not None and defect > raise_above:
        raise StructureError(f"three-mode CM lost its block structure (defect {defect:.3e})")
    return defect


def _read_coefficients(V: np.ndarray) -> SidebandCoefficients:
    V = np.asarray(V, dtype=float)
    if V.shape != (6, 6):
        raise InvalidInputError(f"expected a 6x6 CM, got {V.shape}")
    return SidebandCoefficients(
        A=V[0, 0] - 0.5,
        B=V[2, 2] - 0.5,
        C=V[0, 2],
        D=-V[2, 4],
        E=V[4, 4] - 0.5,
        F=V[0, 4],
    )


def extract_coefficients(state: ThreeModeState) -> SidebandCoefficients:
    """Read the six sideband scalars off the evolved CM.

    Raises:
        StructureError: the CM deviates from the block pattern by more than
            1e-6 of its largest entry.
    """
    structure_defect(state.cm, raise_above=STRUCTURE_TOL)
    return _read_coefficients(state.cm)
