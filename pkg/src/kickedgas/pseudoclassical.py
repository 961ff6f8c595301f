"""The pulsed-pendulum map: classical engine for the driven gas.

One kick period is the composition of two exactly-derived steps:

  1. pendulum flow for one dimensionless time unit,
         theta' = J,   J' = -v_tilde sin(theta)
     (torque sign flipped when the standing wave is phase-shifted by pi),
  2. free drift between pulses,
         theta <- theta - J + 2 pi ell beta   (mod 2 pi),  J unchanged.

The map depends on (epsilon, phi_d) only through v_tilde = epsilon phi_d;
beta enters only through the drift angle. Physical momentum is recovered
via p/hK = J/epsilon.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScaledParams, wrap_angle, wrap_angle_symmetric, TWO_PI
from .dopri import pendulum_flow_arrays, DEFAULT_RTOL, DEFAULT_ATOL

__all__ = [
    "PhasePoint",
    "Trajectory",
    "pendulum_flow",
    "free_map",
    "kick_cycle",
    "evolve_arrays",
    "poincare_section",
]


@dataclass(frozen=True)
class PhasePoint:
    """One pseudoclassical particle: angle, rescaled momentum, quasimomentum."""

    theta: float
    J: float
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", float(wrap_angle(self.theta)))
        if not (-0.5 <= self.beta < 0.5):
            raise ValueError(f"beta must lie in [-1/2, 1/2), got {self.beta}")


@dataclass
class Trajectory:
    """Phase-space snapshots of one particle at integer kick indices.

    Snapshots use the pre-kick convention: entry n is the state immediately
    before kick n+1, so a run over n_kicks periods stores n_kicks + 1 rows.
    """

    theta: np.ndarray
    J: np.ndarray
    beta: float = 0.0

    def __len__(self):
        return len(self.theta)

    @property
    def theta_symmetric(self) -> np.ndarray:
        """Angles wrapped to [-pi, pi), the phase-portrait convention."""
        return wrap_angle_symmetric(self.theta)

    def points(self) -> list:
        return [PhasePoint(t, j, self.beta) for t, j in zip(self.theta, self.J)]


def drift_angle(beta: float, ell: int) -> float:
    """Free-drift phase 2 pi ell beta, reduced to [0, 2 pi)."""
    return float(np.mod(TWO_PI * ell * beta, TWO_PI))


def pendulum_flow(pt: PhasePoint, v_tilde: float, reverse: bool = False,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> PhasePoint:
    """Evolve one point through the during-pulse pendulum flow (unit time)."""
    th, jj = pendulum_flow_arrays(
        np.array([pt.theta]), np.array([pt.J]), v_tilde, reverse, rtol, atol
    )
    return PhasePoint(theta=float(wrap_angle(th[0])), J=float(jj[0]), beta=pt.beta)


def free_map(pt: PhasePoint, ell: int) -> PhasePoint:
    """Apply the between-pulse drift; J is preserved exactly."""
    theta = wrap_angle(pt.theta - pt.J + drift_angle(pt.beta, ell))
    return PhasePoint(theta=float(theta), J=pt.J, beta=pt.beta)


def kick_cycle(pt: PhasePoint, sp: ScaledParams, reverse: bool = False) -> PhasePoint:
    """Advance one full kick period: pendulum flow, then free drift."""
    return free_map(pendulum_flow(pt, sp.v_tilde, reverse), sp.ell)


def evolve_arrays(theta, J, beta, sp: ScaledParams, n_kicks: int,
                  reversal_at: int | None = None, record=None,
                  rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
    """Drive (theta, J) arrays through n_kicks periods in place-free style.

    beta may be a scalar (shared subspace) or an array matching theta.
    When ``reversal_at`` = n_R is given, kicks n_R+1 .. n_kicks run with the
    standing wave phase-shifted by pi (torque sign flipped).
    ``record(n, theta, J)`` is called at every kick index including n = 0.
    Returns the final (theta, J).
    """
    theta = wrap_angle(np.asarray(theta, dtype=float))
    J = np.array(J, dtype=float, copy=True)
    beta_arr = np.broadcast_to(np.asarray(beta, dtype=float), theta.shape)
    drift = np.mod(TWO_PI * sp.ell * beta_arr, TWO_PI)
    if record is not None:
        record(0, theta, J)
    for n in range(1, n_kicks + 1):
        rev = reversal_at is not None and n > reversal_at
        theta, J = pendulum_flow_arrays(theta, J, sp.v_tilde, rev, rtol, atol)
        theta = wrap_angle(theta - J + drift)
        if record is not None:
            record(n, theta, J)
    return theta, J


def poincare_section(initial, sp: ScaledParams, n_kicks: int,
                     rtol: float = DEFAULT_RTOL,
                     atol: float = DEFAULT_ATOL) -> list[Trajectory]:
    """Stroboscopic orbits of a set of initial points over n_kicks periods.

    ``initial`` is a sequence of PhasePoint (or (theta, J) pairs, beta = 0).
    Returns one Trajectory per initial point; trajectories never interact.
    """
    if n_kicks < 1:
        raise ValueError("n_kicks must be >= 1")
    pts = [p if isinstance(p, PhasePoint) else PhasePoint(*p) for p in initial]
    theta0 = np.array([p.theta for p in pts])
    J0 = np.array([p.J for p in pts])
    betas = np.array([p.beta for p in pts])
    th_hist = np.empty((n_kicks + 1, len(pts)))
    j_hist = np.empty((n_kicks + 1, len(pts)))

    def record(n, th, jj):
        th_hist[n] = th
        j_hist[n] = jj

    evolve_arrays(theta0, J0, betas, sp, n_kicks, record=record,
                  rtol=rtol, atol=atol)
    return [
        Trajectory(theta=th_hist[:, i].copy(), J=j_hist[:, i].copy(),
                   beta=float(betas[i]))
        for i in range(len(pts))
    ]
