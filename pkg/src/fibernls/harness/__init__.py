"""Experiment harness: configs, canonical experiments, outputs and the CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (ExperimentResult, run_bound_sweep, run_closeness, run_convergence,
                           run_painleve_check, run_simulate)
from .output import write_result

__all__ = ["ConfigError", "ExperimentConfig", "ExperimentResult", "load_config", "parse_config",
           "run_bound_sweep", "run_closeness", "run_convergence", "run_painleve_check",
           "run_simulate", "write_result"]
