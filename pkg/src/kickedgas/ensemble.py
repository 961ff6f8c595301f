"""Monte Carlo layer: thermal sampling, ensemble evolution, observables.

Initial momenta are drawn from the Maxwell-Boltzmann distribution
D(p/hK) = exp(-(p/hK)^2 / 2 w^2) / (w sqrt(2 pi)); the dimensionless width w
maps to temperature via T_w = (hK)^2 w^2 / (M k_B). Every ensemble member
owns a counter-based random stream keyed by seed XOR member index, so samples
are reproducible independently of ensemble chunking or evolution order.

Both engines consume the same ``InitialConditions``: the quantum engine
reads (k, beta), the pseudoclassical one (theta, J, beta), with
J = (k + beta) epsilon so the two engines start from identical momenta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import pseudoclassical as pc
from . import quantum as q
from .core import ScaledParams, partition_momentum_array
from .distribution import (MomentumDistribution, apply_cutoff, bin_momenta,
                           jensen_shannon)

__all__ = [
    "ThermalSpec",
    "InitialConditions",
    "ObservableSeries",
    "sample_thermal",
    "eigenstate_ensemble",
    "evolve_ensemble",
    "MomentumDistribution",
    "bin_momenta",
    "apply_cutoff",
    "jensen_shannon",
]

ENGINES = ("quantum", "pseudoclassical")


@dataclass(frozen=True)
class ThermalSpec:
    """Maxwell-Boltzmann width w, ensemble size, and master seed."""

    w: float
    n: int
    seed: int

    def __post_init__(self):
        if self.w < 0:
            raise ValueError(f"w must be >= 0, got {self.w}")
        if self.n < 1:
            raise ValueError(f"ensemble size must be >= 1, got {self.n}")


@dataclass
class InitialConditions:
    """Engine-agnostic initial ensemble.

    k, beta : partitioned initial momenta (quantum engine input)
    theta   : initial angles, uniform on [0, 2 pi)
    J       : (k + beta) * epsilon (pseudoclassical engine input)
    """

    k: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    J: np.ndarray
    seed: int
    w: float = 0.0

    @property
    def n(self) -> int:
        return len(self.k)


def _member_stream(seed: int, index: int) -> np.random.Generator:
    key = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ np.uint64(index)
    return np.random.Generator(np.random.Philox(key=int(key)))


def _draw(seed: int, n: int, w: float):
    """Per-member draws: one normal (momentum), one uniform (angle)."""
    p = np.empty(n)
    theta = np.empty(n)
    for j in range(n):
        g = _member_stream(seed, j)
        p[j] = w * g.standard_normal()
        theta[j] = g.uniform(0.0, 2.0 * np.pi)
    return p, theta


def sample_thermal(spec: ThermalSpec, sp: ScaledParams) -> InitialConditions:
    """Draw an initial thermal ensemble for either engine.

    w = 0 collapses every momentum to zero exactly while the angles stay
    random, which is the classical facsimile of a single eigenstate.
    """
    p, theta = _draw(spec.seed, spec.n, spec.w)
    k, beta = partition_momentum_array(p)
    return InitialConditions(k=k, beta=beta, theta=theta,
                             J=(k + beta) * sp.epsilon,
                             seed=spec.seed, w=spec.w)


def eigenstate_ensemble(k0: int, beta: float, n: int, seed: int,
                        sp: ScaledParams) -> InitialConditions:
    """Ensemble representing the single eigenstate |k0 + beta>.

    All members share (k0, beta); angles are uniformly random. J is set to
    the exact correspondence (k0 + beta) epsilon, so both engines report the
    same initial <p^2> = (k0 + beta)^2.
    """
    if not (-0.5 <= beta < 0.5):
        raise ValueError(f"beta must lie in [-1/2, 1/2), got {beta}")
    _, theta = _draw(seed, n, 0.0)
    k = np.full(n, k0, dtype=np.int64)
    b = np.full(n, float(beta))
    return InitialConditions(k=k, beta=b, theta=theta,
                             J=(k + b) * sp.epsilon, seed=seed, w=0.0)


@dataclass
class ObservableSeries:
    """Per-kick record of <p^2> (units (hK)^2) and optional distributions."""

    n: np.ndarray
    p2: np.ndarray
    distributions: list[MomentumDistribution] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=np.int64)
        self.p2 = np.asarray(self.p2, dtype=float)
        if self.n.shape != self.p2.shape:
            raise ValueError("n and p2 must have equal lengths")


def _weighted_mean(values: np.ndarray, weights: np.ndarray) -> float:
    # fsum keeps the reduction independent of accumulation chunking
    return math.fsum((values * weights).tolist())


def evolve_ensemble(init: InitialConditions, sp: ScaledParams, engine: str,
                    n_kicks: int, reversal_at: int | None = None,
                    record_distributions: bool = False,
                    n_substeps: int = q.DEFAULT_SUBSTEPS,
                    k_max: int = q.DEFAULT_K_MAX,
                    edge_threshold: float = q.DEFAULT_EDGE_THRESHOLD,
                    rtol: float = pc.DEFAULT_RTOL,
                    atol: float = pc.DEFAULT_ATOL) -> ObservableSeries:
    """Evolve every ensemble member n_kicks periods and reduce observables.

    With ``reversal_at`` = n_R, kicks n_R+1 .. n_kicks apply the
    pi-phase-shifted (sign-flipped) potential. <p^2> is recorded at every
    kick index including n = 0; distributions too if requested.
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    if n_kicks < 0:
        raise ValueError("n_kicks must be >= 0")
    if reversal_at is not None and not (1 <= reversal_at <= n_kicks):
        raise ValueError(
            f"reversal_at must lie in [1, n_kicks], got {reversal_at}"
        )
    meta = {
        "engine": engine,
        "epsilon": sp.epsilon,
        "phi_d": sp.phi_d,
        "v_tilde": sp.v_tilde,
        "ell": sp.ell,
        "n_members": init.n,
        "seed": init.seed,
        "w": init.w,
        "n_kicks": n_kicks,
        "reversal_at": reversal_at,
    }
    kick_idx = np.arange(n_kicks + 1)

    if engine == "quantum":
        meta["n_substeps"] = n_substeps
        meta["k_max"] = k_max
        # identical (k, beta) members evolve identically: collapse to unique
        # rows with multiplicity weights
        pairs = np.stack([init.k.astype(float), init.beta], axis=1)
        uniq, inverse, counts = np.unique(pairs, axis=0, return_inverse=True,
                                          return_counts=True)
        weights = counts / init.n
        try:
            p2_u, dist, ks = q.propagate_ensemble(
                uniq[:, 0].astype(np.int64), uniq[:, 1], sp, n_kicks,
                n_substeps=n_substeps, k_max=k_max, reversal_at=reversal_at,
                edge_threshold=edge_threshold, weights=weights,
                collect_distributions=record_distributions,
            )
        except q.GridTooSmallError as exc:
            # report the first original member carrying the offending row
            member = int(np.nonzero(inverse == exc.member)[0][0])
            raise q.GridTooSmallError(exc.edge_population,
                                      member=member) from exc
        p2 = np.array([_weighted_mean(p2_u[nk], weights)
                       for nk in range(n_kicks + 1)])
        dists = None
        if record_distributions:
            dists = [MomentumDistribution(k=ks, p=np.maximum(dist[nk], 0.0))
                     for nk in range(n_kicks + 1)]
        return ObservableSeries(n=kick_idx, p2=p2, distributions=dists,
                                metadata=meta)

    meta["rtol"] = rtol
    meta["atol"] = atol
    inv_eps = 1.0 / sp.epsilon
    p2 = np.empty(n_kicks + 1)
    dists: list[MomentumDistribution] | None = (
        [] if record_distributions else None
    )
    uniform = np.full(init.n, 1.0 / init.n)

    def record(nk, theta, J):
        p_hk = J * inv_eps
        p2[nk] = _weighted_mean(p_hk**2, uniform)
        if record_distributions:
            dists.append(bin_momenta(p_hk))

    pc.evolve_arrays(init.theta, init.J, init.beta, sp, n_kicks,
                     reversal_at=reversal_at, record=record,
                     rtol=rtol, atol=atol)
    return ObservableSeries(n=kick_idx, p2=p2, distributions=dists,
                            metadata=meta)
