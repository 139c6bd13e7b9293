"""
Traveling invasion waves of a nonlocal ratio-dependent predator-prey system
with a strong Allee effect in the prey.

This package provides:
- Reaction kinetics, equilibria and the admissibility bound on predation
- Dispersal kernels and the discrete nonlocal operator
- Minimal wave speed and decay rates from the dispersion relation
- Explicit upper/lower solutions with a residual verifier
- The squeeze sequence pinning the coexistence state
- A fixed-point profile solver with continuation to the minimal speed
- Time-domain invasion and logistic comparison runs
"""

# Public API exports
from .errors import TravelWaveError, ConfigError, MathematicalError, NumericalFailure
from .models import (
    Params,
    SolverOptions,
    ContinuationOptions,
    Domain,
    SimOptions,
    LogisticOptions,
    WaveProfile,
)
from .kinetics import reaction_f, reaction_g, equilibria, check_strong_allee_assumption
from .kernel import (
    GaussianKernel,
    LaplaceKernel,
    UniformKernel,
    TabulatedKernel,
    MomentDefinedKernel,
    moment,
    discretize,
    nonlocal_op,
)
from .dispersion import cstar, lambda_roots, eta_select, dispersion_report
from .bounds import build_supersub, verify_supersub
from .squeeze import squeeze_step, contraction_ratio, run_squeeze
from .profile import (
    beta_min,
    apply_P,
    solve_profile,
    solve_profile_at_cstar,
    tail_decay_rate,
)
from .evolve import step, run_invasion, run_logistic_comparison, front_speed
from .config import RunConfig, load_config

__all__ = [
    'TravelWaveError',
    'ConfigError',
    'MathematicalError',
    'NumericalFailure',
    'Params',
    'SolverOptions',
    'ContinuationOptions',
    'Domain',
    'SimOptions',
    'LogisticOptions',
    'WaveProfile',
    'reaction_f',
    'reaction_g',
    'equilibria',
    'check_strong_allee_assumption',
    'GaussianKernel',
    'LaplaceKernel',
    'UniformKernel',
    'TabulatedKernel',
    'MomentDefinedKernel',
    'moment',
    'discretize',
    'nonlocal_op',
    'cstar',
    'lambda_roots',
    'eta_select',
    'dispersion_report',
    'build_supersub',
    'verify_supersub',
    'squeeze_step',
    'contraction_ratio',
    'run_squeeze',
    'beta_min',
    'apply_P',
    'solve_profile',
    'solve_profile_at_cstar',
    'tail_decay_rate',
    'step',
    'run_invasion',
    'run_logistic_comparison',
    'front_speed',
    'RunConfig',
    'load_config',
]
