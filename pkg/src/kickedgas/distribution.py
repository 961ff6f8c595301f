"""Integer-binned momentum distributions and display utilities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MomentumDistribution",
    "bin_momenta",
    "apply_cutoff",
    "jensen_shannon",
]


@dataclass(frozen=True)
class MomentumDistribution:
    """Probabilities P_k on a contiguous range of integer momentum bins.

    ``k`` is ascending and contiguous; ``p`` holds the matching
    probabilities. ``cutoff`` records the display floor if one was applied
    (statistics should always use the pre-cutoff distribution).
    """

    k: np.ndarray
    p: np.ndarray
    cutoff: float | None = None

    def __post_init__(self):
        k = np.asarray(self.k, dtype=np.int64)
        p = np.asarray(self.p, dtype=float)
        if k.shape != p.shape or k.ndim != 1:
            raise ValueError("k and p must be 1-d arrays of equal length")
        if len(k) > 1 and not np.all(np.diff(k) == 1):
            raise ValueError("k must be contiguous ascending integers")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "p", p)

    def total(self) -> float:
        return float(math.fsum(self.p.tolist()))

    def second_moment(self) -> float:
        """Sum of P_k k^2 over the integer bins."""
        return float(np.sum(self.p * self.k.astype(float) ** 2))

    def probability(self, k: int) -> float:
        lo = int(self.k[0])
        if lo <= k <= int(self.k[-1]):
            return float(self.p[k - lo])
        return 0.0

    def on_support(self, k_lo: int, k_hi: int) -> np.ndarray:
        """Probabilities on [k_lo, k_hi], zero-padded outside the stored range."""
        ks = np.arange(k_lo, k_hi + 1)
        out = np.zeros(len(ks))
        lo, hi = int(self.k[0]), int(self.k[-1])
        a = max(k_lo, lo)
        b = min(k_hi, hi)
        if a <= b:
            out[a - k_lo: b - k_lo + 1] = self.p[a - lo: b - lo + 1]
        return out


def bin_momenta(p_over_hk, k_range: tuple[int, int] | None = None) -> MomentumDistribution:
    """Histogram momenta (units of hK) into unit-width bins centered on integers.

    Bin edges sit at half-integers with the upper edge excluded, matching the
    quasimomentum convention: 0.5 falls into bin k = 1. ``k_range`` forces the
    output support (values outside it raise); by default the support is the
    smallest contiguous range covering the data.
    """
    p = np.asarray(p_over_hk, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValueError("cannot bin an empty ensemble")
    if not np.all(np.isfinite(p)):
        raise ValueError("momenta must be finite")
    k = np.floor(p + 0.5).astype(np.int64)
    if k_range is None:
        lo, hi = int(k.min()), int(k.max())
    else:
        lo, hi = k_range
        if k.min() < lo or k.max() > hi:
            raise ValueError("momenta fall outside the requested k_range")
    counts = np.bincount(k - lo, minlength=hi - lo + 1).astype(float)
    return MomentumDistribution(k=np.arange(lo, hi + 1), p=counts / p.size)


def apply_cutoff(dist: MomentumDistribution, cutoff: float) -> MomentumDistribution:
    """Display copy with every bin floored at ``cutoff``; input is untouched."""
    if not (cutoff > 0):
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    return MomentumDistribution(
        k=dist.k.copy(), p=np.maximum(dist.p, cutoff), cutoff=cutoff
    )


def jensen_shannon(p, q) -> float:
    """Jensen-Shannon divergence (natural log) of two probability vectors.

    Inputs are renormalized; zero bins contribute nothing. Bounded by ln 2.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share a support")
    if p.sum() <= 0 or q.sum() <= 0:
        raise ValueError("distributions must have positive mass")
    p = p / p.sum()
    q = q / q.sum()
    m = 0.5 * (p + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(p > 0, p * np.log(p / m), 0.0)
        dq = np.where(q > 0, q * np.log(q / m), 0.0)
    return float(0.5 * dp.sum() + 0.5 * dq.sum())
