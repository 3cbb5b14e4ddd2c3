"""
Federated Algorithms Module

Round loops of the simulated federation:

- FedNewton: workers upload exact local Hessians and gradients
- FedNS: workers upload sketched square-root Hessians and gradients; the server
  solves with the aggregated sketched Hessian
- FedNDES: FedNS directions with a decrement-based exit test, a per-worker Armijo
  search and a sketch size that switches on the decrement
- FedAvg: workers run local gradient descent and the server averages models

Every run returns a RunTrace whose rows are measured against a reference
optimum on the pooled training data.
"""

import logging
import math
import time
from concurrent.futures import Executor
from typing import Sequence

import numpy as np

from src.constants import DEFAULT_SKETCH_KIND, FEDNDES_MBAR1_FACTOR, FEDNDES_MBAR2_FACTOR
from src.data import Shard
from src.errors import ConfigError
from src.federation.config import FedNDESConfig
from src.federation.metrics import Evaluator, RoundMetrics, RoundUpload, RunTrace
from src.federation.server import (
    Federation,
    aggregate_sketched_hessian,
    aggregate_weighted,
    newton_decrement,
    newton_direction,
)
from src.federation.worker import (
    hessian_upload,
    local_gradient_descent,
    local_line_search,
    sketch_upload,
)
from src.objective import (
    LabeledData,
    ModelState,
    Objective,
    effective_dimension,
    loss,
    reference_optimum,
    sqrt_hessian,
)
from src.sketch import SketchKind, sketch_rows_for

logger = logging.getLogger(__name__)

Reference = ModelState | np.ndarray | None


def _evaluator(fed: Federation, reference: Reference, test: LabeledData | None) -> Evaluator:
    if reference is None:
        reference = reference_optimum(fed.obj, fed.pooled)
    w_star = reference.w if isinstance(reference, ModelState) else np.asarray(reference, dtype=float)
    return Evaluator(fed.obj, fed.pooled, loss(fed.obj, fed.pooled, w_star), test)


def _start(algorithm: str, fed: Federation, w0: np.ndarray, evaluator: Evaluator) -> RunTrace:
    trace = RunTrace(algorithm=algorithm, m=fed.m, M=fed.M)
    w0 = ModelState(w0).w
    if w0.shape[0] != fed.M:
        raise ConfigError(f"w0 has length {w0.shape[0]}, model dimension is {fed.M}")
    trace.record(evaluator.measure(0, w0), w0)
    return trace


def _log_round(algorithm: str, row: RoundMetrics) -> None:
    logger.debug(
        f"{algorithm} round {row.round}: loss={row.loss:.10e} gap={row.optimal_gap:.3e} "
        f"decrement={row.decrement:.3e} mu={row.step_size:.3g} up={row.scalars_up} "
        f"({row.wall_ns / 1e6:.1f} ms)"
    )


def _log_run(trace: RunTrace, seed: int | None) -> None:
    last = trace.rows[-1]
    logger.info(
        f"{trace.algorithm} finished after {last.round} rounds "
        f"(m={trace.m}, M={trace.M}, seed={seed}): final gap {last.optimal_gap:.3e}"
    )


def _warn_if_clipped(fed: Federation, kind, k: int) -> None:
    rows = [sketch_rows_for(kind, k, shard.n_samples) for shard in fed.shards]
    if SketchKind(kind) is not SketchKind.SRHT:
        return
    clipped = [shard.worker_id for shard, r in zip(fed.shards, rows) if r < k]
    if clipped:
        logger.warning(
            f"SRHT sketch size {k} exceeds the padded shard size of workers {clipped}; "
            f"clipping their sketches to n_pad rows"
        )


# FedNewton


def _fednewton_step(fed: Federation, w: np.ndarray, mu: float):
    uploads = fed.map(hessian_upload, fed.obj, w)
    H = aggregate_weighted([(u.hessian, u.weight) for u in uploads])
    g = aggregate_weighted([(u.gradient, u.weight) for u in uploads])
    delta_w = newton_direction(H, g)
    return w + mu * delta_w, newton_decrement(g, delta_w), uploads


def fednewton_round(
    shards: Sequence[Shard],
    obj: Objective,
    w: ModelState | np.ndarray,
    mu: float = 1.0,
    executor: Executor | None = None,
) -> ModelState:
    """
    One exact federated Newton step w <- w - mu H^{-1} g with H and g the
    weight-aggregated local Hessians and gradients.
    """
    state = w if isinstance(w, ModelState) else ModelState(w)
    fed = Federation(shards, obj, executor)
    w_next, _, _ = _fednewton_step(fed, state.w, mu)
    return ModelState(w_next, state.round + 1)


def fednewton_run(
    shards: Sequence[Shard],
    obj: Objective,
    w0: np.ndarray,
    mu: float = 1.0,
    T: int = 10,
    reference: Reference = None,
    test: LabeledData | None = None,
    executor: Executor | None = None,
) -> RunTrace:
    """T rounds of FedNewton. Each round uploads m (M^2 + M) scalars."""
    fed = Federation(shards, obj, executor)
    evaluator = _evaluator(fed, reference, test)
    trace = _start("fednewton", fed, w0, evaluator)
    w = trace.iterates[0]

    for t in range(1, T + 1):
        started = time.perf_counter_ns()
        w, decrement, uploads = _fednewton_step(fed, w, mu)
        w = ModelState(w, t).w
        upload = RoundUpload(t, tuple(u.n_scalars for u in uploads))
        row = evaluator.measure(
            t,
            w,
            decrement=decrement,
            step_size=mu,
            scalars_up=upload.total,
            scalars_down=fed.M,
            wall_ns=time.perf_counter_ns() - started,
        )
        trace.record(row, w, upload)
        _log_round(trace.algorithm, row)

    _log_run(trace, None)
    return trace


# FedNS


def _sketch_record(
    fed: Federation, t: int, uploads, kind, k: int, extra: int = 0, exit_round: bool = False
) -> RoundUpload:
    return RoundUpload(
        t,
        tuple(u.n_scalars + extra for u in uploads),
        tuple(u.upsilon.shape[0] for u in uploads),
        requested_k=k,
        sketch_kind=SketchKind(kind).value,
        shard_sizes=tuple(shard.n_samples for shard in fed.shards),
        exit_round=exit_round,
    )


def _sketched_direction(fed: Federation, w: np.ndarray, kind, k: int, seed: int, t: int):
    uploads = fed.map(sketch_upload, fed.obj, w, kind, k, seed, t)
    H = aggregate_sketched_hessian([(u.upsilon, u.weight) for u in uploads], fed.obj.lam)
    g = aggregate_weighted([(u.gradient, u.weight) for u in uploads])
    delta_w = newton_direction(H, g)
    return delta_w, newton_decrement(g, delta_w), uploads


def fedns_round(
    shards: Sequence[Shard],
    obj: Objective,
    w: ModelState | np.ndarray,
    mu: float,
    k: int,
    seed: int,
    kind=DEFAULT_SKETCH_KIND,
    executor: Executor | None = None,
) -> ModelState:
    """
    One FedNS step w <- w - mu H~^{-1} g. Sketches are drawn for round
    ``state.round + 1`` so consecutive calls reproduce ``fedns_run``.
    """
    state = w if isinstance(w, ModelState) else ModelState(w)
    fed = Federation(shards, obj, executor)
    delta_w, _, _ = _sketched_direction(fed, state.w, kind, k, seed, state.round + 1)
    return ModelState(state.w + mu * delta_w, state.round + 1)


def fedns_run(
    shards: Sequence[Shard],
    obj: Objective,
    w0: np.ndarray,
    mu: float,
    k: int,
    T: int,
    seed: int,
    kind=DEFAULT_SKETCH_KIND,
    reference: Reference = None,
    test: LabeledData | None = None,
    executor: Executor | None = None,
) -> RunTrace:
    """
    Federated Newton sketch.

    Every round each worker draws a fresh sketch seeded from (seed, round,
    worker_id), uploads Upsilon_j and g_j, and the server steps with the
    aggregated sketched Hessian.

    Args:
        shards: Worker shards
        obj: Objective (lam > 0)
        w0: Starting point
        mu: Step size
        k: Sketch rows per worker (ignored by the identity kind)
        T: Number of rounds
        seed: Run seed
        kind: Sketch family
        reference: Reference optimum; computed on the pooled data when None
        test: Held-out split for the accuracy column
        executor: Optional executor for per-worker steps

    Returns:
        RunTrace with T + 1 rows

    Raises:
        HessianSolveError: If the aggregated system cannot be solved
    """
    fed = Federation(shards, obj, executor)
    evaluator = _evaluator(fed, reference, test)
    trace = _start("fedns", fed, w0, evaluator)
    w = trace.iterates[0]
    _warn_if_clipped(fed, kind, k)

    for t in range(1, T + 1):
        started = time.perf_counter_ns()
        delta_w, decrement, uploads = _sketched_direction(fed, w, kind, k, seed, t)
        w = ModelState(w + mu * delta_w, t).w
        upload = _sketch_record(fed, t, uploads, kind, k)
        row = evaluator.measure(
            t,
            w,
            decrement=decrement,
            step_size=mu,
            sketch_size=k,
            scalars_up=upload.total,
            scalars_down=fed.M,
            wall_ns=time.perf_counter_ns() - started,
        )
        trace.record(row, w, upload)
        _log_round(trace.algorithm, row)

    _log_run(trace, seed)
    return trace


# FedNDES


def fedndes_sketch_sizes(
    shards: Sequence[Shard], obj: Objective, w0: np.ndarray, cfg: FedNDESConfig
) -> tuple[int, int]:
    """
    Phase sketch sizes (mbar1, mbar2). Missing values default to
    ceil(4 d) and ceil(16 d), d the effective dimension of the loss-term Hessian
    at w0 on the pooled data.
    """
    if cfg.mbar1 is not None and cfg.mbar2 is not None:
        return cfg.mbar1, cfg.mbar2
    fed = Federation(shards, obj)
    factor = sqrt_hessian(obj, fed.pooled, w0).factor
    d_eff = effective_dimension(factor.T @ factor, obj.lam)
    mbar1 = cfg.mbar1 or max(1, math.ceil(FEDNDES_MBAR1_FACTOR * d_eff))
    mbar2 = cfg.mbar2 or max(1, math.ceil(FEDNDES_MBAR2_FACTOR * d_eff))
    logger.info(f"Effective dimension at w0: {d_eff:.3f}; FedNDES sketch sizes {mbar1} / {mbar2}")
    return mbar1, mbar2


def _line_search_task(shard, local_gradient, obj, w, delta_w, decrement, a, b) -> float:
    return local_line_search(shard, obj, w, delta_w, decrement, a, b, local_gradient=local_gradient)


def fedndes_run(
    shards: Sequence[Shard],
    obj: Objective,
    w0: np.ndarray,
    cfg: FedNDESConfig | None = None,
    T_max: int = 20,
    seed: int = 0,
    kind=DEFAULT_SKETCH_KIND,
    reference: Reference = None,
    test: LabeledData | None = None,
    executor: Executor | None = None,
) -> RunTrace:
    """
    Dimension-efficient federated Newton with exit test and line search.

    Round t: every worker uploads a sketch of size k_t together with g_j; the
    server computes Delta w and the decrement. If the exit test holds the run
    returns w_{t-1} (that round uploads only). Otherwise Delta w and the
    decrement are broadcast, every worker returns its Armijo step mu_j, and the
    server applies mu = min_j mu_j. The next round uses mbar1 rows while the
    decrement exceeds eta and mbar2 rows afterwards.

    Returns:
        RunTrace; ``exited`` or ``max_rounds_reached`` tells how it ended

    Raises:
        LineSearchError: If any worker's search exhausts its budget
        HessianSolveError: If the aggregated system cannot be solved
    """
    cfg = cfg or FedNDESConfig()
    fed = Federation(shards, obj, executor)
    evaluator = _evaluator(fed, reference, test)
    trace = _start("fedndes", fed, w0, evaluator)
    w = trace.iterates[0]
    mbar1, mbar2 = fedndes_sketch_sizes(fed.shards, obj, w, cfg)
    for size in {mbar1, mbar2}:
        _warn_if_clipped(fed, kind, size)

    k = mbar1
    for t in range(1, T_max + 1):
        started = time.perf_counter_ns()
        delta_w, decrement, uploads = _sketched_direction(fed, w, kind, k, seed, t)
        if cfg.should_exit(decrement):
            upload = _sketch_record(fed, t, uploads, kind, k, exit_round=True)
            row = evaluator.measure(
                t,
                w,
                decrement=decrement,
                step_size=0.0,
                sketch_size=k,
                scalars_up=upload.total,
                scalars_down=0,
                wall_ns=time.perf_counter_ns() - started,
            )
            trace.record(row, w, upload)
            trace.exited = True
            _log_round(trace.algorithm, row)
            logger.debug(f"fedndes exit test passed at round {t} (decrement {decrement:.3e})")
            break

        steps = fed.map(
            _line_search_task,
            obj,
            w,
            delta_w,
            max(decrement, 0.0),
            cfg.a,
            cfg.b,
            per_worker=[u.gradient for u in uploads],
        )
        mu = min(steps)
        w = ModelState(w + mu * delta_w, t).w
        upload = _sketch_record(fed, t, uploads, kind, k, extra=1)
        row = evaluator.measure(
            t,
            w,
            decrement=decrement,
            step_size=mu,
            sketch_size=k,
            scalars_up=upload.total,
            scalars_down=2 * (fed.M + 1),
            wall_ns=time.perf_counter_ns() - started,
        )
        trace.record(row, w, upload)
        _log_round(trace.algorithm, row)
        k = mbar1 if decrement > cfg.eta else mbar2
    else:
        trace.max_rounds_reached = True
        logger.warning(f"fedndes reached T_max={T_max} without passing the exit test")

    _log_run(trace, seed)
    return trace


# First-order baseline


def fedavg_baseline_run(
    shards: Sequence[Shard],
    obj: Objective,
    w0: np.ndarray,
    local_steps: int = 1,
    step_size: float = 1.0,
    T: int = 10,
    seed: int = 0,
    reference: Reference = None,
    test: LabeledData | None = None,
    executor: Executor | None = None,
) -> RunTrace:
    """
    FedAvg with full-batch local gradient descent. Each round every worker
    takes ``local_steps`` steps from the broadcast model and the server averages
    the results by weight. No randomness is drawn; ``seed`` only labels the run.
    """
    if local_steps < 1:
        raise ConfigError(f"local_steps must be at least 1, got {local_steps}")
    if not step_size > 0:
        raise ConfigError(f"step_size must be positive, got {step_size}")

    fed = Federation(shards, obj, executor)
    evaluator = _evaluator(fed, reference, test)
    trace = _start("fedavg", fed, w0, evaluator)
    w = trace.iterates[0]

    for t in range(1, T + 1):
        started = time.perf_counter_ns()
        uploads = fed.map(local_gradient_descent, obj, w, step_size, local_steps)
        w = ModelState(aggregate_weighted([(u.w, u.weight) for u in uploads]), t).w
        upload = RoundUpload(t, tuple(u.n_scalars for u in uploads))
        row = evaluator.measure(
            t,
            w,
            step_size=step_size,
            scalars_up=upload.total,
            scalars_down=fed.M,
            wall_ns=time.perf_counter_ns() - started,
        )
        trace.record(row, w, upload)
        _log_round(trace.algorithm, row)

    _log_run(trace, seed)
    return trace
