"""Configuration-driven experiment runner and trace files."""

from src.experiment.config import ExperimentConfig, load_config, parse_config
from src.experiment.runner import (
    EffectiveDimensionReport,
    ExperimentResult,
    Problem,
    estimate_effective_dimension,
    prepare_problem,
    run_experiment,
    run_single,
    sweep_sketch_size,
)
from src.experiment.trace_io import mean_rows, read_trace, trace_rows, write_trace

__all__ = [
    "EffectiveDimensionReport",
    "ExperimentConfig",
    "ExperimentResult",
    "Problem",
    "estimate_effective_dimension",
    "load_config",
    "mean_rows",
    "parse_config",
    "prepare_problem",
    "read_trace",
    "run_experiment",
    "run_single",
    "sweep_sketch_size",
    "trace_rows",
    "write_trace",
]
