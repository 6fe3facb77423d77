"""Tamed Euler particle schemes for measure-dependent SDEs.

The package simulates interacting particle systems whose drift and
diffusion depend on the empirical measure, either through averaged
interaction kernels or through direct functionals of the particle
cloud.  All schemes are fully explicit; superlinear coefficients are
handled by taming, never by implicit solves.

Layout
------
model        coefficient families and raw evaluation
taming       tamed wrappers around the raw coefficients
rng          counter-based Brownian tableau, refinement-coupled
ensemble     particle-cloud container and empirical statistics
scheme       one-step maps and the simulation loop
metrics      Wasserstein-2 estimators and rate fitting
probes       numerical checks of the structural inequalities
experiments  convergence / stability / contraction drivers
config       INI config grammar, validation, canonical emission
cli          the `mvsde` command-line entry point
"""

from ._core import backend_name
from ._version import VERSION as __version__
from .config import (CONFIG_VERSION, EXPERIMENTS, ConfigError, RunConfig,
                     emit_config, make_config, parse_config)
from .ensemble import (EmpiricalMeasure, ParticleEnsemble, center_of_mass,
                       empirical_moment, make_ensemble, particle_norms,
                       snapshot_csv, w2_to_origin)
from .experiments import (DIVERGENCE_NORM, ErgodicReport, RateReport,
                          StabilityReport, check_step_bound,
                          run_ergodic_contraction, run_moment_stability,
                          run_poc_rate, run_simulate, run_strong_rate,
                          theoretical_constants)
from .metrics import (EXACT_ASSIGNMENT_CAP, RateFit, fit_loglog_slope, w2,
                      w2_sliced)
from .model import (FAMILIES, MEASURE_MODES, CoefficientModel, eval_drift_b,
                    eval_kernel_f, eval_kernel_g, eval_pair_drift,
                    eval_pair_sigma, eval_sigma, make_model)
from .probes import (DOCUMENTED_SETS, PROBE_SETS, AssumptionReport,
                     documented_sets, probe_assumptions)
from .rng import (QUANT, BrownianTableau, increments_at_level, initial_law,
                  level_increments, make_tableau, parse_initial,
                  sample_initial)
from .scheme import (SCHEME_KINDS, MomentTracker, SnapshotWriter,
                     StateRecorder, TimeGrid, make_grid, simulate, step)
from .taming import (VARIANTS, TamedModel, kernel_weight, self_denominator,
                     tamed_drift_b, tamed_kernel_f, tamed_kernel_g,
                     tamed_sigma, taming_parameters)
from .cli import main

__all__ = [
    "AssumptionReport", "BrownianTableau", "CONFIG_VERSION",
    "CoefficientModel", "ConfigError", "DIVERGENCE_NORM",
    "DOCUMENTED_SETS", "EXACT_ASSIGNMENT_CAP", "EXPERIMENTS",
    "EmpiricalMeasure", "ErgodicReport", "FAMILIES", "MEASURE_MODES",
    "MomentTracker", "PROBE_SETS", "ParticleEnsemble", "QUANT",
    "RateFit", "RateReport", "RunConfig", "SCHEME_KINDS",
    "SnapshotWriter", "StabilityReport", "StateRecorder", "TamedModel",
    "TimeGrid", "VARIANTS", "backend_name", "center_of_mass",
    "check_step_bound", "documented_sets", "emit_config",
    "empirical_moment", "eval_drift_b", "eval_kernel_f", "eval_kernel_g",
    "eval_pair_drift", "eval_pair_sigma", "eval_sigma",
    "fit_loglog_slope", "increments_at_level", "initial_law",
    "level_increments", "main", "make_config", "make_ensemble",
    "make_grid", "make_model", "make_tableau", "parse_config",
    "parse_initial", "particle_norms", "probe_assumptions",
    "run_ergodic_contraction", "run_moment_stability", "run_poc_rate",
    "run_simulate", "run_strong_rate", "sample_initial", "simulate",
    "snapshot_csv", "step", "tamed_drift_b", "tamed_kernel_f",
    "tamed_kernel_g", "tamed_sigma", "taming_parameters",
    "theoretical_constants", "w2", "w2_sliced", "w2_to_origin",
    "__version__",
]
