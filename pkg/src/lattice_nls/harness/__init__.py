"""Configuration, sweeps, persistence and the command line."""

from .config import ConfigError, ExperimentConfig, load_config
from .profiles import PROFILES, ProfileSpec, parse_profile, register_profile
from .study import (
    ConvergenceReport,
    ConvergenceRow,
    ReferenceUnderResolved,
    emit_report,
    load_run,
    read_report,
    run_convergence_study,
    run_single,
)
