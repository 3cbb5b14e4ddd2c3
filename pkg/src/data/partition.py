"""
Partition Module

Splits a Dataset into disjoint worker shards, either IID or label-skewed with
Dirichlet class proportions, and carves out held-out test splits.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.constants import STREAM_PARTITION, STREAM_SPLIT
from src.data.dataset import Dataset, Shard
from src.errors import PartitionError
from src.sketch import make_rng

logger = logging.getLogger(__name__)


class PartitionStrategy(str, Enum):
    """How samples are distributed across workers."""

    IID = "iid"
    LABEL_SKEW = "label_skew"


@dataclass(frozen=True)
class PartitionPlan:
    """
    Attributes:
        strategy: PartitionStrategy
        m: Number of workers (>= 1)
        dirichlet_alpha: Concentration of the per-class proportions (label_skew only)
        seed: Partition seed
    """

    strategy: PartitionStrategy
    m: int
    dirichlet_alpha: float | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", PartitionStrategy(self.strategy))
        if self.m < 1:
            raise PartitionError(f"Worker count must be at least 1, got {self.m}")
        if self.strategy is PartitionStrategy.LABEL_SKEW:
            if self.dirichlet_alpha is None or not self.dirichlet_alpha > 0:
                raise PartitionError(
                    f"label_skew needs dirichlet_alpha > 0, got {self.dirichlet_alpha}"
                )


def _iid_assignment(n: int, m: int, rng: np.random.Generator) -> list[np.ndarray]:
    return np.array_split(rng.permutation(n), m)


def _label_skew_assignment(
    labels: np.ndarray, m: int, alpha: float, rng: np.random.Generator
) -> list[np.ndarray]:
    # Draw order per class (ascending label): proportions, then the permutation.
    buckets: list[list[int]] = [[] for _ in range(m)]
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        proportions = rng.dirichlet(np.full(m, alpha))
        members = rng.permutation(members)
        cuts = (np.cumsum(proportions)[:-1] * len(members)).astype(int)
        for worker, part in enumerate(np.split(members, cuts)):
            buckets[worker].extend(part.tolist())

    # Repair: every empty shard takes one sample from the currently largest one.
    for worker in range(m):
        if not buckets[worker]:
            donor = max(range(m), key=lambda j: len(buckets[j]))
            buckets[worker].append(buckets[donor].pop())
            logger.debug(f"Moved one sample from worker {donor} to empty worker {worker}")
    return [np.array(bucket, dtype=int) for bucket in buckets]


def partition(dataset: Dataset, plan: PartitionPlan) -> list[Shard]:
    """
    Distributes every sample to exactly one of plan.m non-empty shards.

    IID shuffles with the partition stream and cuts contiguous blocks whose sizes
    differ by at most one. LabelSkew visits classes in ascending label order and,
    per class, draws Dirichlet(alpha * 1_m) proportions and then a permutation of
    the class members, which are cut at floor(cumsum(proportions) * n_class).

    Args:
        dataset: Source dataset
        plan: PartitionPlan

    Returns:
        Shards ordered by worker_id, each with weight n_j / N and sorted sample ids

    Raises:
        PartitionError: If m > N
    """
    n = dataset.n_samples
    if plan.m > n:
        raise PartitionError(f"Cannot split {n} samples across {plan.m} workers")

    rng = make_rng(plan.seed, STREAM_PARTITION)
    if plan.strategy is PartitionStrategy.IID:
        assignment = _iid_assignment(n, plan.m, rng)
    else:
        assignment = _label_skew_assignment(dataset.labels, plan.m, plan.dirichlet_alpha, rng)

    shards = []
    for worker_id, ids in enumerate(assignment):
        ids = np.sort(ids)
        shards.append(
            Shard(
                features=dataset.features[ids],
                labels=dataset.labels[ids],
                weight=len(ids) / n,
                worker_id=worker_id,
                sample_ids=ids,
            )
        )
    logger.debug(
        f"Partitioned {n} samples ({plan.strategy.value}) into sizes "
        f"{[shard.n_samples for shard in shards]}"
    )
    return shards


def train_test_split(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset | None]:
    """
    Holds out round(test_fraction * N) samples for evaluation.

    Returns:
        (train, test); test is None when test_fraction is 0

    Raises:
        PartitionError: If the fraction leaves either side empty
    """
    if test_fraction == 0:
        return dataset, None
    n = dataset.n_samples
    n_test = int(round(test_fraction * n))
    if not 0 < n_test < n:
        raise PartitionError(f"test_fraction={test_fraction} leaves an empty split of {n} samples")
    order = make_rng(seed, STREAM_SPLIT).permutation(n)
    test_ids = np.sort(order[:n_test])
    train_ids = np.sort(order[n_test:])
    return (
        dataset.subset(train_ids, f"{dataset.name}[train]"),
        dataset.subset(test_ids, f"{dataset.name}[test]"),
    )
