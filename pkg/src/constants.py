"""
Constants Module

This module contains all hardcoded constants used throughout the application.
Centralizing constants here makes them easier to maintain and modify.
"""

# Objective defaults
DEFAULT_LAMBDA = 1e-3

# Linear solves
JITTER_SCALE = 1e-12  # multiplied by tr(H)/M
JITTER_ESCALATIONS = 3

# Sketching
MATERIALIZE_MAX_ENTRIES = 10**8
SKETCH_KINDS = ["gaussian", "srht", "sjlt", "identity"]
DEFAULT_SKETCH_KIND = "srht"

# RNG stream ids (combined with the user seed through numpy SeedSequence)
STREAM_SKETCH = 1
STREAM_PARTITION = 2
STREAM_FEATURE_MAP = 3
STREAM_SYNTHETIC = 4
STREAM_SPLIT = 5

# Reference optimum
REFERENCE_TOL = 1e-12
REFERENCE_MAX_ITER = 100
PURE_NEWTON_DECREMENT = 1e-8  # damped solver takes full steps below this decrement

# FedNDES defaults
FEDNDES_ARMIJO_A = 0.1
FEDNDES_BACKTRACK_B = 0.5
FEDNDES_ETA = 1.0 / 16.0
FEDNDES_DELTA = 1e-12
FEDNDES_MBAR1_FACTOR = 4.0
FEDNDES_MBAR2_FACTOR = 16.0
MAX_BACKTRACKS = 50
ARMIJO_SLACK = 1e-14  # relative to max(1, |L|); absorbs rounding in the loss difference

# Communication accounting
BYTES_PER_SCALAR = 8

# Experiment outputs
DEFAULT_OUTPUT_DIR = "runs"
TRACE_COLUMNS = [
    "round",
    "loss",
    "optimal_gap",
    "grad_norm",
    "decrement",
    "step_size",
    "sketch_size",
    "scalars_up",
    "scalars_down",
    "cumulative_up",
    "test_accuracy",
]
SWEEP_COLUMNS = [
    "sketch_size",
    "mean_final_gap",
    "min_final_gap",
    "max_final_gap",
    "mean_final_accuracy",
    "mean_scalars_up",
]

# Exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_NUMERICAL_ERROR = 4

# Environment (ambient CLI defaults only, never experiment parameters)
ENV_LOG_LEVEL = "FEDSKETCH_LOG_LEVEL"
ENV_OUTPUT_DIR = "FEDSKETCH_OUTPUT_DIR"

# Property-based testing
PBT_MIN_ITERATIONS = 100
