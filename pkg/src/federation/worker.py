"""
Worker Module

Everything a worker computes on its own shard: sketched square-root Hessians,
exact local Hessians, local gradients, the per-worker Armijo line search and
local gradient descent for the first-order baseline. Workers share no mutable
state; all their randomness is pre-derived from (seed, round, worker_id).
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.constants import ARMIJO_SLACK, MAX_BACKTRACKS, STREAM_SKETCH
from src.data import Shard
from src.errors import LineSearchError, SketchError
from src.objective import Objective, gradient, hessian, loss, sqrt_hessian
from src.sketch import SketchOperator, apply_sketch, derive_seed, make_sketch, sketch_rows_for

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SketchUpload:
    """Sketched square-root Hessian Upsilon_j (k_j x M) and local gradient g_j."""

    worker_id: int
    weight: float
    upsilon: np.ndarray
    gradient: np.ndarray

    @property
    def n_scalars(self) -> int:
        return self.upsilon.size + self.gradient.size


@dataclass(frozen=True, eq=False)
class HessianUpload:
    """Exact local Hessian (M x M) and local gradient."""

    worker_id: int
    weight: float
    hessian: np.ndarray
    gradient: np.ndarray

    @property
    def n_scalars(self) -> int:
        return self.hessian.size + self.gradient.size


@dataclass(frozen=True, eq=False)
class ModelUpload:
    """Locally trained model of the first-order baseline."""

    worker_id: int
    weight: float
    w: np.ndarray

    @property
    def n_scalars(self) -> int:
        return self.w.size


def worker_sketch(shard: Shard, kind, k: int, seed: int, round_index: int) -> SketchOperator:
    """
    Fresh sketch for one (round, worker) pair, seeded from
    (seed, STREAM_SKETCH, round_index, worker_id). SRHT rows are clipped to the
    shard's padded size and the identity always has n_j rows.
    """
    n = shard.n_samples
    rows = sketch_rows_for(kind, k, n)
    child_seed = derive_seed(seed, STREAM_SKETCH, round_index, shard.worker_id)
    return make_sketch(kind, rows, n, child_seed)


def local_sketch_round(
    shard: Shard, obj: Objective, w: np.ndarray, sketch: SketchOperator
) -> tuple[np.ndarray, np.ndarray]:
    """
    One worker's FedNS upload.

    Args:
        shard: Local data D_j
        obj: Objective
        w: Current global iterate
        sketch: S_j with S_j.n == n_j

    Returns:
        (Upsilon_j, g_j): S_j times the local square-root factor, and the local
        gradient including the lam * w term

    Raises:
        SketchError: If the sketch does not match the shard size
    """
    if sketch.n != shard.n_samples:
        raise SketchError(
            f"Worker {shard.worker_id}: sketch built for {sketch.n} rows, shard has {shard.n_samples}"
        )
    factor = sqrt_hessian(obj, shard, w, owner=shard.worker_id).factor
    return apply_sketch(sketch, factor), gradient(obj, shard, w)


def sketch_upload(
    shard: Shard, obj: Objective, w: np.ndarray, kind, k: int, seed: int, round_index: int
) -> SketchUpload:
    """Draws the worker's sketch for this round and packages its upload."""
    sketch = worker_sketch(shard, kind, k, seed, round_index)
    upsilon, g = local_sketch_round(shard, obj, w, sketch)
    return SketchUpload(shard.worker_id, shard.weight, upsilon, g)


def hessian_upload(shard: Shard, obj: Objective, w: np.ndarray) -> HessianUpload:
    """Exact local Hessian (lam * I included) and gradient for FedNewton."""
    return HessianUpload(shard.worker_id, shard.weight, hessian(obj, shard, w), gradient(obj, shard, w))


def armijo_predicate(
    trial_value: float,
    value: float,
    mu: float,
    decrement: float,
    a: float,
    correction: float = 0.0,
) -> bool:
    """
    Sufficient decrease test trial_value - mu * correction <= value - a * mu * decrement,
    up to ARMIJO_SLACK relative rounding.
    """
    slack = ARMIJO_SLACK * max(1.0, abs(value))
    return trial_value - mu * correction <= value - a * mu * decrement + slack


def local_line_search(
    shard: Shard,
    obj: Objective,
    w: np.ndarray,
    delta_w: np.ndarray,
    lambda_tilde: float,
    a: float,
    b: float,
    max_backtracks: int = MAX_BACKTRACKS,
    local_gradient: np.ndarray | None = None,
) -> float:
    """
    Backtracking from mu = 1 until the Armijo predicate holds on the shard.

    Without ``local_gradient`` the predicate is the plain one,
    L(D_j, w + mu dw) <= L(D_j, w) - a mu lambda_tilde. With it, the shard loss
    is shifted by mu * (g_j^T dw + lambda_tilde), which leaves the weighted sum
    over workers equal to L(D, .) and makes -lambda_tilde the slope at mu = 0 on
    every shard, so the search terminates whenever lambda_tilde > 0.

    Args:
        shard: Local data D_j
        obj: Objective
        w: Current global iterate
        delta_w: Broadcast search direction
        lambda_tilde: Broadcast decrement (nonnegative convention)
        a: Armijo slope in (0, 0.5)
        b: Backtracking factor in (0, 1)
        max_backtracks: Budget of step halvings (for b = 0.5)
        local_gradient: g_j computed in the same round, enabling the correction

    Returns:
        mu_j = b^i for the smallest i satisfying the predicate

    Raises:
        LineSearchError: If no step within the budget satisfies the predicate
    """
    delta_w = np.asarray(delta_w, dtype=float)
    value = loss(obj, shard, w)
    correction = 0.0
    if local_gradient is not None:
        correction = float(np.asarray(local_gradient) @ delta_w) + lambda_tilde

    mu = 1.0
    for backtracks in range(max_backtracks + 1):
        trial = loss(obj, shard, w + mu * delta_w)
        if armijo_predicate(trial, value, mu, lambda_tilde, a, correction):
            if backtracks:
                logger.debug(f"Worker {shard.worker_id}: mu = {mu:.3e} after {backtracks} backtracks")
            return mu
        mu *= b
    raise LineSearchError(
        f"Worker {shard.worker_id}: no Armijo step after {max_backtracks} backtracks "
        f"(decrement {lambda_tilde:.3e}); direction is not a descent direction",
        worker_id=shard.worker_id,
        backtracks=max_backtracks,
    )


def local_gradient_descent(
    shard: Shard, obj: Objective, w: np.ndarray, step_size: float, local_steps: int
) -> ModelUpload:
    """Runs ``local_steps`` full-batch gradient steps on the shard."""
    w_local = np.array(w, dtype=float)
    for _ in range(local_steps):
        w_local = w_local - step_size * gradient(obj, shard, w_local)
    return ModelUpload(shard.worker_id, shard.weight, w_local)
