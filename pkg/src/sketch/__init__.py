"""Randomized sketch operators (Gaussian, SRHT, SJLT, identity)."""

from src.sketch.hadamard import fwht, next_power_of_two
from src.sketch.operators import (
    SketchKind,
    SketchOperator,
    apply_sketch,
    make_sketch,
    materialize,
    sketch_rows_for,
)
from src.sketch.rng import derive_seed, make_rng

__all__ = [
    "SketchKind",
    "SketchOperator",
    "apply_sketch",
    "derive_seed",
    "fwht",
    "make_rng",
    "make_sketch",
    "materialize",
    "next_power_of_two",
    "sketch_rows_for",
]
