import os

import numpy as np
import pytest

from src.data import Dataset, PartitionPlan, partition, synth_logistic, synth_ridge
from src.objective import Objective, reference_optimum

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


def random_dataset(n: int, d: int, seed: int, family: str = "logistic") -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    if family == "logistic":
        y = np.where(rng.uniform(size=n) < 0.5, 1.0, -1.0)
    else:
        y = rng.standard_normal(n)
    return Dataset(X, y, f"random-{family}-{seed}")


def make_shards(dataset: Dataset, m: int, strategy: str = "iid", alpha: float | None = None, seed: int = 0):
    return partition(dataset, PartitionPlan(strategy, m, alpha, seed))


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def logistic_fixture():
    """Five samples in R^3 with a fixed nonzero w."""
    X = np.array(
        [
            [0.5, -1.2, 0.3],
            [1.5, 0.2, -0.7],
            [-0.3, 0.8, 1.1],
            [2.0, -0.5, 0.0],
            [-1.0, -1.0, 0.4],
        ]
    )
    y = np.array([1.0, -1.0, 1.0, -1.0, 1.0])
    w = np.array([0.3, -0.2, 0.5])
    return Dataset(X, y, "logistic-fixture"), w


@pytest.fixture(scope="session")
def benchmark_dataset():
    """Synthetic logistic benchmark (n=2000, d=20, 1/i^2 spectrum)."""
    return synth_logistic(2000, 20, 2.0, seed=0)


@pytest.fixture(scope="session")
def benchmark_problem(benchmark_dataset):
    obj = Objective("logistic", 1e-3)
    shards = make_shards(benchmark_dataset, 4)
    reference = reference_optimum(obj, benchmark_dataset)
    return obj, shards, reference


@pytest.fixture
def ridge_dataset():
    return synth_ridge(400, 6, noise=0.1, seed=3)
