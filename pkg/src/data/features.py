"""
Feature Map Module

Maps raw inputs x in R^d to the model space phi(x) in R^M. The identity map keeps
the data as-is; random Fourier features approximate the Gaussian kernel
exp(-||x - x'||^2 / (2 bandwidth^2)) with phi(x) = sqrt(2/M) cos(x^T Omega + b).
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.constants import STREAM_FEATURE_MAP
from src.data.dataset import Dataset
from src.errors import DataError
from src.sketch import make_rng


class FeatureMapKind(str, Enum):
    """Supported feature maps."""

    IDENTITY = "identity"
    RANDOM_FOURIER = "random_fourier"


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """
    Deterministic feature map.

    Attributes:
        kind: FeatureMapKind
        input_dim: Raw dimension d
        output_dim: Model dimension M (equal to d for the identity)
        bandwidth: Gaussian kernel bandwidth (random Fourier only)
        seed: Seed the frequencies were drawn from (random Fourier only)
        frequencies: d x M matrix with N(0, 1 / bandwidth^2) entries
        phases: Length-M phases, uniform on [0, 2 pi)
    """

    kind: FeatureMapKind
    input_dim: int
    output_dim: int
    bandwidth: float | None = None
    seed: int | None = None
    frequencies: np.ndarray | None = field(default=None, repr=False)
    phases: np.ndarray | None = field(default=None, repr=False)


def make_feature_map(
    kind,
    input_dim: int,
    output_dim: int | None = None,
    bandwidth: float = 1.0,
    seed: int = 0,
) -> FeatureMap:
    """
    Builds a feature map.

    Args:
        kind: FeatureMapKind or its string value
        input_dim: Raw feature dimension d
        output_dim: M; defaults to d and must equal d for the identity
        bandwidth: Gaussian kernel bandwidth (> 0)
        seed: Seed for the random Fourier draws

    Raises:
        DataError: Invalid dimensions or bandwidth
    """
    kind = FeatureMapKind(kind)
    if input_dim < 1:
        raise DataError(f"Feature map input dimension must be positive, got {input_dim}")

    if kind is FeatureMapKind.IDENTITY:
        if output_dim is not None and output_dim != input_dim:
            raise DataError(
                f"Identity feature map needs output_dim == input_dim ({input_dim}), got {output_dim}"
            )
        return FeatureMap(kind=kind, input_dim=input_dim, output_dim=input_dim)

    if output_dim is None or output_dim < 1:
        raise DataError(f"Random Fourier features need a positive output_dim, got {output_dim}")
    if not bandwidth > 0:
        raise DataError(f"Bandwidth must be positive, got {bandwidth}")

    rng = make_rng(seed, STREAM_FEATURE_MAP)
    frequencies = rng.standard_normal((input_dim, output_dim)) / bandwidth
    phases = rng.uniform(0.0, 2.0 * math.pi, size=output_dim)
    frequencies.setflags(write=False)
    phases.setflags(write=False)
    return FeatureMap(
        kind=kind,
        input_dim=input_dim,
        output_dim=output_dim,
        bandwidth=float(bandwidth),
        seed=seed,
        frequencies=frequencies,
        phases=phases,
    )


def apply_feature_map(fm: FeatureMap, dataset: Dataset) -> Dataset:
    """
    Applies the map to every sample. The identity returns the dataset itself.

    Raises:
        DataError: If the dataset dimension differs from fm.input_dim
    """
    if dataset.feature_dim != fm.input_dim:
        raise DataError(
            f"Feature map expects {fm.input_dim} input features, dataset has {dataset.feature_dim}"
        )
    if fm.kind is FeatureMapKind.IDENTITY:
        return dataset

    projected = dataset.features @ fm.frequencies + fm.phases
    features = math.sqrt(2.0 / fm.output_dim) * np.cos(projected)
    return Dataset(features, dataset.labels, f"{dataset.name}+rff{fm.output_dim}")
