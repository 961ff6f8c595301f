"""Quantum Floquet engine for one quasimomentum subspace.

One kick period applies two unitaries to the momentum coefficients c_k:

  kick  : exp(-i [k^2 eps/2 + k beta eps - phi_d cos(theta)])
  free  : exp(+i [k^2 eps/2 + k beta (eps - 2 pi ell)])

The free factor is diagonal in k and exact. The kick factor mixes k and
theta, so it is evaluated by second-order symmetric (Strang) splitting with
``n_substeps`` sub-intervals: half-step kinetic phase in momentum space, a
full potential phase in angle space reached through a unitary FFT, then the
closing kinetic half step. With the wave phase-shifted by pi (``reverse``)
the sign of phi_d flips, which is what undoes resonant spreading.

Within a beta subspace the beta^2 terms are global phases and are dropped.
States live on a power-of-two grid of integer momenta (FFT frequencies);
population reaching the outermost modes is a hard error rather than silent
aliasing.

``propagate_ensemble`` evolves many (k0, beta) eigenstates in one batched
pass; chunk boundaries and reduction order are fixed constants, so outputs
are bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScaledParams
from .distribution import MomentumDistribution

__all__ = [
    "QuantumState",
    "GridTooSmallError",
    "init_eigenstate",
    "apply_kick",
    "apply_free",
    "floquet_step",
    "expectation_p2",
    "distribution_of",
    "propagate_ensemble",
]

DEFAULT_K_MAX = 127
DEFAULT_SUBSTEPS = 1000
DEFAULT_EDGE_THRESHOLD = 1e-12
_CHUNK = 1024  # fixed batching constant; part of the deterministic algorithm


class GridTooSmallError(RuntimeError):
    """Population reached the outermost momentum modes; enlarge k_max."""

    def __init__(self, edge_population, member=None):
        self.edge_population = edge_population
        self.member = member
        msg = (
            f"edge momentum modes hold {edge_population:.3e} population; "
            "increase k_max to avoid aliasing"
        )
        if member is not None:
            msg += f" (ensemble member {member})"
        super().__init__(msg)


def grid_size(k_max: int) -> int:
    """Smallest power of two holding the modes -k_max..+k_max."""
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    n = 8
    while n < 2 * k_max + 1:
        n *= 2
    return n


def _grid(n: int):
    k = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)  # FFT-ordered integers
    theta = 2.0 * np.pi * np.arange(n) / n
    return k, theta


@dataclass
class QuantumState:
    """Coefficients over integer momenta k within a fixed beta subspace.

    ``c`` is complex and FFT-ordered to match ``k``; use :meth:`sorted_k`
    / :meth:`sorted_probabilities` for human-ordered views.
    """

    beta: float
    c: np.ndarray
    k: np.ndarray
    k_max: int

    def __post_init__(self):
        if not (-0.5 <= self.beta < 0.5):
            raise ValueError(f"beta must lie in [-1/2, 1/2), got {self.beta}")

    @property
    def n_grid(self) -> int:
        return len(self.c)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.c) ** 2))

    def copy(self) -> "QuantumState":
        return QuantumState(self.beta, self.c.copy(), self.k, self.k_max)

    def sorted_k(self) -> np.ndarray:
        return np.sort(self.k)

    def sorted_probabilities(self) -> np.ndarray:
        return np.abs(self.c[np.argsort(self.k)]) ** 2

    def edge_population(self) -> float:
        """Largest |c|^2 on the two outermost momentum modes."""
        n = self.n_grid
        i_neg = np.nonzero(self.k == -n // 2)[0][0]
        i_pos = np.nonzero(self.k == n // 2 - 1)[0][0]
        return float(max(abs(self.c[i_neg]) ** 2, abs(self.c[i_pos]) ** 2))


def init_eigenstate(k0: int, beta: float, k_max: int = DEFAULT_K_MAX) -> QuantumState:
    """Momentum eigenstate |k0 + beta> on a grid sized for k_max."""
    if abs(k0) >= k_max:
        raise ValueError(f"|k0| must be < k_max, got k0={k0}, k_max={k_max}")
    n = grid_size(k_max)
    k, _ = _grid(n)
    c = np.zeros(n, complex)
    c[np.nonzero(k == k0)[0][0]] = 1.0
    return QuantumState(beta=float(beta), c=c, k=k, k_max=k_max)


def _kick_tables(k, theta, beta, sp: ScaledParams, n_substeps, reverse):
    """Phase tables for one kick. beta may be scalar or column vector."""
    delta = 1.0 / n_substeps
    kin = k * k * (sp.epsilon / 2.0) + np.multiply.outer(
        np.atleast_1d(beta), k.astype(float)
    ) * sp.epsilon
    sign = -1.0 if reverse else 1.0
    e_pot = np.exp(1j * sign * sp.phi_d * np.cos(theta) * delta)
    return np.exp(-1j * kin * (delta / 2.0)), np.exp(-1j * kin * delta), e_pot


def _apply_kick_rows(c, e_kin_half, e_kin_full, e_pot, n_substeps):
    """Strang-split kick on (rows, n_grid) coefficients; returns new array."""
    c = c * e_kin_half
    for s in range(n_substeps):
        psi = np.fft.ifft(c, axis=-1, norm="ortho")
        psi *= e_pot
        c = np.fft.fft(psi, axis=-1, norm="ortho")
        c *= e_kin_full if s < n_substeps - 1 else e_kin_half
    return c


def apply_kick(state: QuantumState, sp: ScaledParams,
               n_substeps: int = DEFAULT_SUBSTEPS, reverse: bool = False,
               edge_threshold: float = DEFAULT_EDGE_THRESHOLD) -> QuantumState:
    """One finite-duration pulse via symmetric split-step propagation."""
    if n_substeps < 1:
        raise ValueError(f"n_substeps must be >= 1, got {n_substeps}")
    _, theta = _grid(state.n_grid)
    ekh, ekf, ep = _kick_tables(state.k, theta, state.beta, sp, n_substeps,
                                reverse)
    c = _apply_kick_rows(state.c[None, :], ekh, ekf, ep, n_substeps)[0]
    out = QuantumState(state.beta, c, state.k, state.k_max)
    edge = out.edge_population()
    if edge > edge_threshold:
        raise GridTooSmallError(edge)
    return out


def apply_free(state: QuantumState, sp: ScaledParams) -> QuantumState:
    """Between-pulse evolution: an exact momentum-diagonal phase."""
    k = state.k
    phase = k * k * (sp.epsilon / 2.0) + k * state.beta * (
        sp.epsilon - 2.0 * np.pi * sp.ell
    )
    return QuantumState(state.beta, state.c * np.exp(1j * phase), k, state.k_max)


def floquet_step(state: QuantumState, sp: ScaledParams,
                 n_substeps: int = DEFAULT_SUBSTEPS, reverse: bool = False,
                 edge_threshold: float = DEFAULT_EDGE_THRESHOLD) -> QuantumState:
    """One full kick period: pulse first, then free flight."""
    return apply_free(apply_kick(state, sp, n_substeps, reverse,
                                 edge_threshold), sp)


def expectation_p2(state: QuantumState) -> float:
    """<p^2> in units of (hK)^2: sum of |c_k|^2 (k + beta)^2."""
    w = (state.k.astype(float) + state.beta) ** 2
    return float(np.sum(np.abs(state.c) ** 2 * w))


def distribution_of(state: QuantumState) -> MomentumDistribution:
    """P_k = |c_k|^2 on the state's integer momentum bins."""
    order = np.argsort(state.k)
    return MomentumDistribution(k=state.k[order],
                                p=np.abs(state.c[order]) ** 2)


def propagate_ensemble(k0, beta, sp: ScaledParams, n_kicks: int,
                       n_substeps: int = DEFAULT_SUBSTEPS,
                       k_max: int = DEFAULT_K_MAX,
                       reversal_at: int | None = None,
                       edge_threshold: float = DEFAULT_EDGE_THRESHOLD,
                       weights=None, collect_distributions: bool = False):
    """Evolve many momentum eigenstates through n_kicks periods.

    k0, beta : arrays of initial integer momenta and quasimomenta.
    weights  : optional per-member weights for the averaged distribution
               (weights for <p^2> are applied by the caller; the per-member
               series is returned in full).

    Returns (p2, dist): p2 has shape (n_kicks+1, n_members) in units of
    (hK)^2; dist is an (n_kicks+1, n_grid) weight-averaged |c_k|^2 on the
    sorted momentum grid (or None), alongside the sorted k values.
    """
    k0 = np.asarray(k0, dtype=np.int64).reshape(-1)
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if k0.shape != beta.shape:
        raise ValueError("k0 and beta must have equal lengths")
    if np.any(np.abs(k0) >= k_max):
        raise ValueError("initial |k0| must be < k_max")
    if reversal_at is not None and not (1 <= reversal_at <= n_kicks):
        raise ValueError("reversal_at must lie in [1, n_kicks]")
    n_members = len(k0)
    n = grid_size(k_max)
    k, theta = _grid(n)
    order = np.argsort(k)
    i_neg = int(np.nonzero(k == -n // 2)[0][0])
    i_pos = int(np.nonzero(k == n // 2 - 1)[0][0])
    if weights is None:
        weights = np.full(n_members, 1.0 / n_members)
    else:
        weights = np.asarray(weights, dtype=float).reshape(-1)

    p2 = np.empty((n_kicks + 1, n_members))
    dist = np.zeros((n_kicks + 1, n)) if collect_distributions else None

    for lo in range(0, n_members, _CHUNK):
        hi = min(lo + _CHUNK, n_members)
        rows = hi - lo
        bchunk = beta[lo:hi]
        c = np.zeros((rows, n), complex)
        col = np.searchsorted(k[order], k0[lo:hi])
        c[np.arange(rows), order[col]] = 1.0
        w_p2 = (k.astype(float)[None, :] + bchunk[:, None]) ** 2
        ekh_f, ekf_f, ep_f = _kick_tables(k, theta, bchunk, sp, n_substeps,
                                          reverse=False)
        ekh_r = ekf_r = ep_r = None
        free = k * k * (sp.epsilon / 2.0) + np.multiply.outer(
            bchunk, k.astype(float)
        ) * (sp.epsilon - 2.0 * np.pi * sp.ell)
        e_free = np.exp(1j * free)

        p2[0, lo:hi] = np.sum(np.abs(c) ** 2 * w_p2, axis=1)
        if collect_distributions:
            dist[0] += (np.abs(c[:, order]) ** 2).T @ weights[lo:hi]
        for nk in range(1, n_kicks + 1):
            rev = reversal_at is not None and nk > reversal_at
            if rev and ekh_r is None:
                ekh_r, ekf_r, ep_r = _kick_tables(k, theta, bchunk, sp,
                                                  n_substeps, reverse=True)
            if rev:
                c = _apply_kick_rows(c, ekh_r, ekf_r, ep_r, n_substeps)
            else:
                c = _apply_kick_rows(c, ekh_f, ekf_f, ep_f, n_substeps)
            edge = np.abs(c[:, [i_neg, i_pos]]) ** 2
            worst = int(np.argmax(edge.max(axis=1)))
            if edge[worst].max() > edge_threshold:
                raise GridTooSmallError(float(edge[worst].max()),
                                        member=lo + worst)
            c *= e_free
            p2[nk, lo:hi] = np.sum(np.abs(c) ** 2 * w_p2, axis=1)
            if collect_distributions:
                dist[nk] += (np.abs(c[:, order]) ** 2).T @ weights[lo:hi]
    return p2, dist, k[order]
