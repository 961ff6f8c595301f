"""Parameter algebra and the integer/quasimomentum partitioning.

A particle of mass M in a pulsed standing wave of wavenumber K = 2 k_L is
described, once lengths are measured against the standing-wave period and
momenta in units of hK, by four dimensionless numbers:

    epsilon : hK^2 t_p / M, the scaled pulse duration
    phi_d   : kick strength
    v_tilde : epsilon * phi_d, the only combination the pulsed-pendulum
              map depends on
    ell     : pulse period in units of half the Talbot time (even integer)

Momentum in units of hK splits as p/hK = k + beta with integer k and
quasimomentum beta in [-1/2, 1/2); beta is conserved by the dynamics, so
every engine works within a fixed-beta subspace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR

__all__ = [
    "PhysicalParams",
    "ScaledParams",
    "PartitionedMomentum",
    "partition_momentum",
    "talbot_time",
    "scale_params",
    "j_to_momentum",
    "momentum_to_j",
    "wrap_angle",
    "wrap_angle_symmetric",
]


def _require_even_ell(ell) -> int:
    if not isinstance(ell, (int, np.integer)):
        raise TypeError(f"ell must be an integer, got {type(ell).__name__}")
    ell = int(ell)
    if ell <= 0:
        raise ValueError(f"ell must be positive, got {ell}")
    if ell % 2 != 0:
        raise ValueError(
            f"ell must be even (odd resonances are unsupported), got {ell}"
        )
    return ell


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory-frame experiment parameters.

    mass      : atomic mass M, kg
    wavenumber: K = 2 k_L, 1/m
    pulse_duration: t_p, s
    phi_d     : dimensionless kick strength
    ell       : pulse period T = ell * T_Talbot / 2, positive even integer
    """

    mass: float
    wavenumber: float
    pulse_duration: float
    phi_d: float
    ell: int = 2

    def __post_init__(self):
        if not (self.mass > 0):
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not (self.wavenumber > 0):
            raise ValueError(f"wavenumber must be positive, got {self.wavenumber}")
        if not (self.pulse_duration > 0):
            raise ValueError(
                f"pulse_duration must be positive, got {self.pulse_duration}"
            )
        if not (self.phi_d >= 0):
            raise ValueError(f"phi_d must be >= 0, got {self.phi_d}")
        object.__setattr__(self, "ell", _require_even_ell(self.ell))


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless parameters shared by both engines.

    The rescaled kick strength ``v_tilde`` is always ``epsilon * phi_d``;
    it is stored rather than recomputed so the exact float product is fixed
    once per parameter set.
    """

    epsilon: float
    phi_d: float
    ell: int = 2

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (self.phi_d >= 0):
            raise ValueError(f"phi_d must be >= 0, got {self.phi_d}")
        object.__setattr__(self, "ell", _require_even_ell(self.ell))

    @property
    def v_tilde(self) -> float:
        return self.epsilon * self.phi_d

    @classmethod
    def from_v_tilde(cls, v_tilde: float, phi_d: float, ell: int = 2) -> "ScaledParams":
        """Build parameters with a prescribed v_tilde at the given phi_d."""
        if not (phi_d > 0):
            raise ValueError("phi_d must be positive to invert v_tilde")
        return cls(epsilon=v_tilde / phi_d, phi_d=phi_d, ell=ell)


@dataclass(frozen=True)
class PartitionedMomentum:
    """Integer part k and quasimomentum beta of p/hK; k + beta == p/hK."""

    k: int
    beta: float


def partition_momentum(p_over_hk: float) -> PartitionedMomentum:
    """Split p/hK into integer k and beta in [-1/2, 1/2).

    The boundary +1/2 belongs to the next integer: 0.5 -> (1, -0.5).
    """
    p = float(p_over_hk)
    if not math.isfinite(p):
        raise ValueError(f"momentum must be finite, got {p_over_hk!r}")
    k = math.floor(p + 0.5)
    return PartitionedMomentum(k=k, beta=p - k)


def partition_momentum_array(p_over_hk):
    """Vectorized partition: returns (k, beta) integer and float arrays."""
    p = np.asarray(p_over_hk, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("momenta must be finite")
    k = np.floor(p + 0.5)
    return k.astype(np.int64), p - k


def talbot_time(params: PhysicalParams) -> float:
    """Pulse period 4 pi M / (hbar K^2) at which free evolution is trivial."""
    return 4.0 * math.pi * params.mass / (HBAR * params.wavenumber**2)


def scale_params(params: PhysicalParams) -> ScaledParams:
    """Reduce laboratory parameters to the dimensionless set."""
    epsilon = (
        HBAR * params.wavenumber**2 * params.pulse_duration / params.mass
    )
    return ScaledParams(epsilon=epsilon, phi_d=params.phi_d, ell=params.ell)


def j_to_momentum(j, epsilon: float):
    """Map the rescaled momentum J to p/hK = J / epsilon."""
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    return np.asarray(j) / epsilon if np.ndim(j) else float(j) / epsilon


def momentum_to_j(p_over_hk, epsilon: float):
    """Map p/hK = k + beta to the rescaled momentum J = (k + beta) epsilon."""
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    p = np.asarray(p_over_hk) if np.ndim(p_over_hk) else float(p_over_hk)
    return p * epsilon


TWO_PI = 2.0 * math.pi


def wrap_angle(theta):
    """Wrap angle(s) to [0, 2*pi)."""
    return np.mod(theta, TWO_PI)


def wrap_angle_symmetric(theta):
    """Wrap angle(s) to [-pi, pi), the convention used for phase portraits."""
    return np.mod(np.asarray(theta) + math.pi, TWO_PI) - math.pi
