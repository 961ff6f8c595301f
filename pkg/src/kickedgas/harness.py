"""Experiment runner: named protocols, CSV/JSON serialization, comparison.

Each experiment kind reproduces the data behind one family of figures:

  p2-series         one <p^2> time series per engine
  epsilon-sweep     scaled-pulse-duration sweep with universal rescaling
                    columns (p2 * eps^2 vs n * eps)
  beta-sweep        quasimomentum dependence at fixed epsilon
  poincare          stroboscopic phase-space sections per driving strength
  distribution      per-kick momentum distributions (with display cutoff)
                    plus the <p^2> series
  temperature-sweep thermal-width sweep, reporting <p^2>/w^2

Outputs are deterministic: rerunning a config with the same seed reproduces
every data file byte for byte (the manifest's timing fields excepted).
Floats are written with repr, which round-trips exactly.
"""
from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import PhysicalParams, ScaledParams, scale_params
from .distribution import apply_cutoff
from .ensemble import (InitialConditions, ObservableSeries, ThermalSpec,
                       eigenstate_ensemble, evolve_ensemble, sample_thermal)
from .pseudoclassical import PhasePoint, poincare_section
from .quantum import DEFAULT_K_MAX, DEFAULT_SUBSTEPS

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "DeviationReport",
    "compare",
    "run",
    "EXPERIMENT_KINDS",
]

EXPERIMENT_KINDS = (
    "p2-series",
    "epsilon-sweep",
    "beta-sweep",
    "poincare",
    "distribution",
    "temperature-sweep",
)

ENGINE_CHOICES = ("quantum", "pseudoclassical", "both")

DEFAULT_PHI_D = 0.8 * math.pi
DEFAULT_CUTOFF = 1e-11
DEFAULT_N_PARTICLES = 100_000

# Default sweep grids: log-spaced pulse durations and thermal widths, plus
# the standard driving strengths for phase portraits
EPSILON_GRID = tuple(10 ** (-2 + 2 * j / 11) for j in range(11))
BETA_GRID = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25)
W_GRID = tuple(10 ** (-1 + 2 * j / 5) for j in range(6))
V_TILDE_GRID = (0.251, 2.51, 5.01, 7.51)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    kind: str
    engine: str = "both"
    epsilon: float | None = None
    phi_d: float = DEFAULT_PHI_D
    ell: int = 2
    # physical provenance; mutually exclusive with an explicit epsilon
    mass: float | None = None
    wavenumber: float | None = None
    pulse_duration: float | None = None
    beta: float = 0.0
    w: float = 0.0
    n_particles: int = DEFAULT_N_PARTICLES
    n_kicks: int = 30
    seed: int = 0
    reversal_at: int | None = None
    cutoff: float = DEFAULT_CUTOFF
    k_max: int = DEFAULT_K_MAX
    n_substeps: int = DEFAULT_SUBSTEPS
    out: str = "out"
    # sweep grids (kind-specific; None selects the figure defaults)
    epsilons: list | None = None
    betas: list | None = None
    ws: list | None = None
    v_tildes: list | None = None
    n_points: int = 100  # poincare initial conditions

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "kind" not in data:
            raise ConfigError("config must declare an experiment kind")
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)

    def validate(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(
                f"unknown experiment kind {self.kind!r}; "
                f"choose from {EXPERIMENT_KINDS}"
            )
        if self.engine not in ENGINE_CHOICES:
            raise ConfigError(
                f"engine must be one of {ENGINE_CHOICES}, got {self.engine!r}"
            )
        physical = (self.mass, self.wavenumber, self.pulse_duration)
        if any(v is not None for v in physical):
            if any(v is None for v in physical):
                raise ConfigError(
                    "physical parameters require mass, wavenumber and "
                    "pulse_duration together"
                )
            if self.epsilon is not None:
                raise ConfigError(
                    "give either epsilon or physical parameters, not both"
                )
        if not self.effective_epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if not self.cutoff > 0:
            raise ConfigError("cutoff must be positive")
        if self.phi_d < 0:
            raise ConfigError("phi_d must be >= 0")
        if not (-0.5 <= self.beta < 0.5):
            raise ConfigError("beta must lie in [-1/2, 1/2)")
        if self.w < 0:
            raise ConfigError("w must be >= 0")
        if self.n_particles < 1:
            raise ConfigError("n_particles must be >= 1")
        if self.n_kicks < 1:
            raise ConfigError("n_kicks must be >= 1")
        if self.ell < 2 or self.ell % 2:
            raise ConfigError("ell must be a positive even integer")
        if self.reversal_at is not None and not (
                1 <= self.reversal_at <= self.n_kicks):
            raise ConfigError("reversal_at must lie in [1, n_kicks]")
        if self.k_max < 2:
            raise ConfigError("k_max must be >= 2")
        if self.n_substeps < 1:
            raise ConfigError("n_substeps must be >= 1")
        if self.n_points < 1:
            raise ConfigError("n_points must be >= 1")
        if self.kind == "poincare" and self.engine == "quantum":
            raise ConfigError("poincare sections are pseudoclassical only")

    @property
    def effective_epsilon(self) -> float:
        """Scaled pulse duration: explicit, derived from physical
        parameters, or the 0.1 default."""
        if self.epsilon is not None:
            return self.epsilon
        if self.mass is not None:
            try:
                phys = PhysicalParams(mass=self.mass,
                                      wavenumber=self.wavenumber,
                                      pulse_duration=self.pulse_duration,
                                      phi_d=self.phi_d, ell=self.ell)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from exc
            return scale_params(phys).epsilon
        return 0.1

    def scaled_params(self, epsilon: float | None = None) -> ScaledParams:
        return ScaledParams(
            epsilon=self.effective_epsilon if epsilon is None else epsilon,
            phi_d=self.phi_d, ell=self.ell)

    def engines(self) -> tuple[str, ...]:
        if self.engine == "both":
            return ("quantum", "pseudoclassical")
        return (self.engine,)


# ----------------------------------------------------------------------
# series comparison

@dataclass
class DeviationReport:
    """Per-kick relative deviation of one <p^2> series against a reference.

    ``onset`` is the first kick index at which the relative deviation
    exceeds ``threshold`` (None if it never does).
    """

    n: np.ndarray
    relative: np.ndarray
    max_deviation: float
    threshold: float
    onset: int | None

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "max_deviation": self.max_deviation,
            "onset": self.onset,
            "n": self.n.tolist(),
            "relative": self.relative.tolist(),
        }


def compare(series: ObservableSeries, reference: ObservableSeries,
            threshold: float = 0.05) -> DeviationReport:
    """Relative <p^2> deviation of ``series`` from ``reference`` per kick.

    Kicks where both values are exactly zero count as zero deviation.
    """
    if not np.array_equal(series.n, reference.n):
        raise ValueError("series must share the same kick grid")
    a = series.p2
    b = reference.p2
    rel = np.zeros(len(a))
    both_zero = (a == 0) & (b == 0)
    denom = np.where(b != 0, np.abs(b), 1.0)
    rel = np.where(both_zero, 0.0, np.abs(a - b) / denom)
    rel = np.where((b == 0) & ~both_zero, np.inf, rel)
    above = np.nonzero(rel > threshold)[0]
    onset = int(series.n[above[0]]) if len(above) else None
    return DeviationReport(n=series.n.copy(), relative=rel,
                           max_deviation=float(np.max(rel)),
                           threshold=threshold, onset=onset)


# ----------------------------------------------------------------------
# file output helpers

def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _series_rows(series: ObservableSeries, rescale_eps: float | None = None,
                 w: float | None = None):
    for i, n in enumerate(series.n):
        row = [int(n), series.p2[i]]
        if rescale_eps is not None:
            row.extend([series.p2[i] * rescale_eps**2, n * rescale_eps])
        if w is not None:
            row.append(series.p2[i] / w**2)
        yield row


def _write_p2_csv(path: Path, series: ObservableSeries,
                  rescale_eps: float | None = None,
                  w: float | None = None) -> None:
    header = ["n", "p2"]
    if rescale_eps is not None:
        header += ["p2_rescaled", "n_rescaled"]
    if w is not None:
        header += ["p2_over_w2"]
    _write_csv(path, header, _series_rows(series, rescale_eps, w))


def _write_distribution_csv(path: Path, series: ObservableSeries,
                            cutoff: float) -> None:
    rows = []
    for i, n in enumerate(series.n):
        dist = series.distributions[i]
        disp = apply_cutoff(dist, cutoff)
        for j, k in enumerate(dist.k):
            rows.append([int(n), int(k), dist.p[j], disp.p[j]])
    _write_csv(path, ["n", "k", "P_k", "P_k_display"], rows)


def _write_poincare_csv(path: Path, trajectories) -> None:
    rows = []
    for tid, traj in enumerate(trajectories):
        sym = traj.theta_symmetric
        for n in range(len(traj)):
            rows.append([tid, n, traj.theta[n], traj.J[n], sym[n]])
    _write_csv(path, ["trajectory_id", "n", "theta", "J", "theta_sym"], rows)


# ----------------------------------------------------------------------
# experiment implementations

def _initial_conditions(cfg: ExperimentConfig, sp: ScaledParams,
                        n: int | None = None) -> InitialConditions:
    n = cfg.n_particles if n is None else n
    if cfg.w > 0:
        return sample_thermal(ThermalSpec(w=cfg.w, n=n, seed=cfg.seed), sp)
    return eigenstate_ensemble(0, cfg.beta, n, cfg.seed, sp)


def _evolve(cfg: ExperimentConfig, sp: ScaledParams, engine: str,
            init: InitialConditions, record_distributions=False,
            n_kicks: int | None = None) -> ObservableSeries:
    return evolve_ensemble(
        init, sp, engine, cfg.n_kicks if n_kicks is None else n_kicks,
        reversal_at=cfg.reversal_at,
        record_distributions=record_distributions,
        n_substeps=cfg.n_substeps, k_max=cfg.k_max,
    )


def _run_p2_series(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    sp = cfg.scaled_params()
    init = _initial_conditions(cfg, sp)
    paths = []
    for engine in cfg.engines():
        series = _evolve(cfg, sp, engine, init)
        path = outdir / f"p2_series_{engine}.csv"
        _write_p2_csv(path, series)
        paths.append(path)
    return paths


def _run_epsilon_sweep(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    epsilons = cfg.epsilons if cfg.epsilons is not None else list(EPSILON_GRID)
    paths = []
    for i, eps in enumerate(epsilons):
        sp = cfg.scaled_params(epsilon=float(eps))
        init = _initial_conditions(cfg, sp)
        for engine in cfg.engines():
            series = _evolve(cfg, sp, engine, init)
            sub = outdir / f"eps_{i:02d}_{engine}"
            sub.mkdir(parents=True, exist_ok=True)
            path = sub / "p2_series.csv"
            _write_p2_csv(path, series, rescale_eps=float(eps))
            paths.append(path)
    return paths


def _run_beta_sweep(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    betas = cfg.betas if cfg.betas is not None else list(BETA_GRID)
    sp = cfg.scaled_params()
    paths = []
    for i, beta in enumerate(betas):
        beta_cfg = dataclasses.replace(cfg, beta=float(beta))
        init = _initial_conditions(beta_cfg, sp)
        for engine in cfg.engines():
            series = _evolve(beta_cfg, sp, engine, init)
            sub = outdir / f"beta_{i:02d}_{engine}"
            sub.mkdir(parents=True, exist_ok=True)
            path = sub / "p2_series.csv"
            _write_p2_csv(path, series)
            paths.append(path)
    return paths


def _run_poincare(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    v_tildes = cfg.v_tildes if cfg.v_tildes is not None else list(V_TILDE_GRID)
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    theta0 = rng.uniform(0.0, 2.0 * np.pi, cfg.n_points)
    paths = []
    for i, v in enumerate(v_tildes):
        sp = ScaledParams.from_v_tilde(float(v), cfg.phi_d, cfg.ell)
        initial = [PhasePoint(t, 0.0, cfg.beta) for t in theta0]
        trajectories = poincare_section(initial, sp, cfg.n_kicks)
        sub = outdir / f"vtilde_{i:02d}"
        sub.mkdir(parents=True, exist_ok=True)
        path = sub / "poincare.csv"
        _write_poincare_csv(path, trajectories)
        paths.append(path)
    return paths


def _run_distribution(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    sp = cfg.scaled_params()
    init = _initial_conditions(cfg, sp)
    paths = []
    for engine in cfg.engines():
        series = _evolve(cfg, sp, engine, init, record_distributions=True)
        sub = outdir / engine
        sub.mkdir(parents=True, exist_ok=True)
        dist_path = sub / "distribution.csv"
        _write_distribution_csv(dist_path, series, cfg.cutoff)
        p2_path = sub / "p2_series.csv"
        _write_p2_csv(p2_path, series)
        paths.extend([dist_path, p2_path])
    return paths


def _run_temperature_sweep(cfg: ExperimentConfig, outdir: Path) -> list[Path]:
    ws = cfg.ws if cfg.ws is not None else list(W_GRID)
    sp = cfg.scaled_params()
    engines = cfg.engines()
    paths = []
    for i, w in enumerate(ws):
        if not w > 0:
            raise ConfigError("temperature-sweep widths must be positive")
        init = sample_thermal(ThermalSpec(w=float(w), n=cfg.n_particles,
                                          seed=cfg.seed), sp)
        for engine in engines:
            series = _evolve(cfg, sp, engine, init)
            sub = outdir / f"w_{i:02d}_{engine}"
            sub.mkdir(parents=True, exist_ok=True)
            path = sub / "p2_series.csv"
            _write_p2_csv(path, series, w=float(w))
            paths.append(path)
    return paths


_RUNNERS = {
    "p2-series": _run_p2_series,
    "epsilon-sweep": _run_epsilon_sweep,
    "beta-sweep": _run_beta_sweep,
    "poincare": _run_poincare,
    "distribution": _run_distribution,
    "temperature-sweep": _run_temperature_sweep,
}


def run(cfg: ExperimentConfig) -> list[Path]:
    """Execute one experiment; returns the written data files.

    A manifest.json (config echo, seed, code version, wall time, output
    list) is written alongside the data.
    """
    cfg.validate()
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    paths = _RUNNERS[cfg.kind](cfg, outdir)
    manifest = {
        "config": dataclasses.asdict(cfg),
        "seed": cfg.seed,
        "code_version": __version__,
        "wall_time_s": time.perf_counter() - start,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p.relative_to(outdir)) for p in paths],
    }
    manifest_path = outdir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n",
                             encoding="utf-8", newline="\n")
    return paths + [manifest_path]
