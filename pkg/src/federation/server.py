"""
Server Module

Server-side aggregation of worker uploads and the ``Federation`` runner that
dispatches per-worker work, optionally over a ``concurrent.futures`` executor.
Aggregation always happens after every worker has reported and always in
ascending worker id, so serial and concurrent runs are bit-identical.
"""

import logging
from concurrent.futures import Executor
from typing import Callable, Sequence, TypeVar

import numpy as np

from src.data import Shard, pool_shards
from src.errors import PartitionError
from src.objective import Objective, solve_psd

logger = logging.getLogger(__name__)

T = TypeVar("T")

WEIGHT_TOLERANCE = 1e-12


def aggregate_sketched_hessian(
    uploads: Sequence[tuple[np.ndarray, float]], lam: float
) -> np.ndarray:
    """
    Approximate global Hessian sum_j weight_j Upsilon_j^T Upsilon_j + lam * I.

    Args:
        uploads: (Upsilon_j, weight_j) pairs in ascending worker id
        lam: Regularization weight (kept exact, never sketched)

    Returns:
        Symmetric M x M matrix
    """
    if not uploads:
        raise ValueError("No uploads to aggregate")
    M = uploads[0][0].shape[1]
    H = np.zeros((M, M))
    for upsilon, weight in uploads:
        H += weight * (upsilon.T @ upsilon)
    H = 0.5 * (H + H.T)
    H[np.diag_indices_from(H)] += lam
    return H


def aggregate_weighted(values: Sequence[tuple[np.ndarray, float]]) -> np.ndarray:
    """Weighted sum of per-worker arrays (gradients, Hessians or models), in order."""
    if not values:
        raise ValueError("No uploads to aggregate")
    total = np.zeros_like(np.asarray(values[0][0], dtype=float))
    for value, weight in values:
        total += weight * value
    return total


def newton_direction(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Delta w = -H^{-1} g."""
    return -solve_psd(H, g)


def newton_decrement(g: np.ndarray, delta_w: np.ndarray) -> float:
    """
    Approximate Newton decrement -g^T Delta w, i.e. g^T H^{-1} g for
    Delta w = -H^{-1} g. Nonnegative whenever H is PSD.
    """
    return float(-(np.asarray(g) @ np.asarray(delta_w)))


class Federation:
    """
    m workers sharing one objective.

    Attributes:
        shards: Shards in ascending worker id
        obj: Objective
        executor: Optional executor used for per-worker steps
    """

    def __init__(self, shards: Sequence[Shard], obj: Objective, executor: Executor | None = None):
        if not shards:
            raise PartitionError("A federation needs at least one shard")
        self.shards = sorted(shards, key=lambda shard: shard.worker_id)
        self.obj = obj
        self.executor = executor

        ids = [shard.worker_id for shard in self.shards]
        if len(set(ids)) != len(ids):
            raise PartitionError(f"Duplicate worker ids: {ids}")
        dims = {shard.feature_dim for shard in self.shards}
        if len(dims) != 1:
            raise PartitionError(f"Shards disagree on the feature dimension: {sorted(dims)}")
        total_weight = sum(shard.weight for shard in self.shards)
        if abs(total_weight - 1.0) > WEIGHT_TOLERANCE:
            raise PartitionError(f"Shard weights sum to {total_weight!r}, expected 1")

        self._pooled = None

    @property
    def m(self) -> int:
        return len(self.shards)

    @property
    def M(self) -> int:
        return self.shards[0].feature_dim

    @property
    def pooled(self):
        """Union of all shards, used only for evaluation."""
        if self._pooled is None:
            self._pooled = pool_shards(self.shards)
        return self._pooled

    def map(self, fn: Callable[..., T], *args, per_worker: Sequence | None = None) -> list[T]:
        """
        Calls fn(shard, *args) for every worker, or fn(shard, per_worker[j], *args)
        when per-worker arguments are given, and returns results in worker order.
        """
        if per_worker is None:
            calls = [(shard, *args) for shard in self.shards]
        else:
            calls = [(shard, own, *args) for shard, own in zip(self.shards, per_worker)]
        if self.executor is None:
            return [fn(*call) for call in calls]
        futures = [self.executor.submit(fn, *call) for call in calls]
        return [future.result() for future in futures]
