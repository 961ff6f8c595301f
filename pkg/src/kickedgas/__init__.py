"""kickedgas: two-engine simulator for a periodically pulsed cold atomic gas.

A dilute gas driven by finite-duration standing-wave pulses at (multiples
of) half the Talbot time is simulated two ways:

* a fully quantum split-step Floquet propagator per quasimomentum subspace;
* a pseudoclassical map (pendulum flow during pulses, drift between them)
  in which the scaled pulse duration plays the role of an effective Planck
  constant.

The ensemble layer runs Monte Carlo simulations of thermal gases under
either engine; the harness reproduces the standard experiment protocols and
writes plot-ready CSV output.
"""

__version__ = "0.1.0"

from .constants import HBAR, K_B, MASS_CS133
from .core import (PartitionedMomentum, PhysicalParams, ScaledParams,
                   j_to_momentum, momentum_to_j, partition_momentum,
                   scale_params, talbot_time, wrap_angle,
                   wrap_angle_symmetric)
from .distribution import (MomentumDistribution, apply_cutoff, bin_momenta,
                           jensen_shannon)
from .dopri import IntegratorError
from .ensemble import (InitialConditions, ObservableSeries, ThermalSpec,
                       eigenstate_ensemble, evolve_ensemble, sample_thermal)
from .harness import (ConfigError, DeviationReport, ExperimentConfig,
                      compare, run)
from .pseudoclassical import (PhasePoint, Trajectory, free_map, kick_cycle,
                              pendulum_flow, poincare_section)
from .quantum import (GridTooSmallError, QuantumState, apply_free,
                      apply_kick, distribution_of, expectation_p2,
                      floquet_step, init_eigenstate)

__all__ = [
    "__version__",
    "HBAR", "K_B", "MASS_CS133",
    "PhysicalParams", "ScaledParams", "PartitionedMomentum",
    "partition_momentum", "talbot_time", "scale_params",
    "j_to_momentum", "momentum_to_j", "wrap_angle", "wrap_angle_symmetric",
    "MomentumDistribution", "bin_momenta", "apply_cutoff", "jensen_shannon",
    "QuantumState", "GridTooSmallError", "init_eigenstate", "apply_kick",
    "apply_free", "floquet_step", "expectation_p2", "distribution_of",
    "PhasePoint", "Trajectory", "pendulum_flow", "free_map", "kick_cycle",
    "poincare_section", "IntegratorError",
    "ThermalSpec", "InitialConditions", "ObservableSeries",
    "sample_thermal", "eigenstate_ensemble", "evolve_ensemble",
    "ExperimentConfig", "ConfigError", "DeviationReport", "compare", "run",
]
