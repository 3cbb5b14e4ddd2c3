"""
Dataset Module

Dense in-memory datasets and the per-worker shards they are split into.
"""

from dataclasses import dataclass

import numpy as np

from src.errors import DataError


def _frozen_array(values, ndim: int, what: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise DataError(f"{what} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DataError(f"{what} contains NaN or Inf")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Feature-mapped samples with labels.

    Attributes:
        features: N x d matrix (no NaN/Inf)
        labels: Length-N label vector ({-1, +1} for classification)
        name: Human-readable identifier used in trace headers
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        features = _frozen_array(self.features, 2, "features")
        labels = _frozen_array(self.labels, 1, "labels")
        if features.shape[0] < 1:
            raise DataError("Dataset must contain at least one sample")
        if features.shape[0] != labels.shape[0]:
            raise DataError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray, name: str | None = None) -> "Dataset":
        """Dataset restricted to the given sample indices (in the given order)."""
        indices = np.asarray(indices, dtype=int)
        return Dataset(self.features[indices], self.labels[indices], name or self.name)


@dataclass(frozen=True, eq=False)
class Shard:
    """
    One worker's local data D_j.

    Attributes:
        features: n_j x M matrix
        labels: Length-n_j labels
        weight: Federation weight n_j / N
        worker_id: Worker index (aggregation order)
        sample_ids: Indices of the samples in the source dataset
    """

    features: np.ndarray
    labels: np.ndarray
    weight: float
    worker_id: int
    sample_ids: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]


def pool_shards(shards: list[Shard], name: str = "pooled") -> Dataset:
    """Re-assembles the union of shards (ordered by source sample id)."""
    ids = np.concatenate([shard.sample_ids for shard in shards])
    order = np.argsort(ids, kind="stable")
    features = np.vstack([shard.features for shard in shards])[order]
    labels = np.concatenate([shard.labels for shard in shards])[order]
    return Dataset(features, labels, name)
