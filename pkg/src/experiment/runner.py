"""
Experiment Runner Module

Turns a validated ExperimentConfig into traces:

1. load the dataset, split off the test share, apply the feature map
2. partition the training data and compute the reference optimum once
3. run the configured algorithm for every seed (optionally seed-parallel)
4. write one trace per seed plus the mean-aggregate trace
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from src.constants import (
    FEDNDES_MBAR1_FACTOR,
    FEDNDES_MBAR2_FACTOR,
    SWEEP_COLUMNS,
)
from src.data import (
    Dataset,
    PartitionPlan,
    Shard,
    apply_feature_map,
    load_libsvm,
    make_feature_map,
    partition,
    pool_shards,
    synth_logistic,
    synth_ridge,
    train_test_split,
)
from src.errors import ConfigError
from src.experiment.config import (
    ExperimentConfig,
    FedAvgSpec,
    FedNDESSpec,
    FedNewtonSpec,
    FedNSSpec,
    LibsvmSource,
    SyntheticLogisticSource,
)
from src.experiment.trace_io import mean_rows, trace_rows, write_csv, write_header, write_trace
from src.federation import (
    RunTrace,
    communication_ledger,
    fedavg_baseline_run,
    fedndes_run,
    fednewton_run,
    fedns_run,
)
from src.objective import (
    ModelState,
    Objective,
    effective_dimension,
    loss,
    reference_optimum,
    sqrt_hessian,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Problem:
    """Everything shared by the runs of one experiment."""

    obj: Objective
    shards: list[Shard]
    train: Dataset
    test: Dataset | None
    reference: ModelState
    reference_loss: float
    w0: np.ndarray
    effective_dimension: float

    @property
    def M(self) -> int:
        return self.train.feature_dim

    @property
    def N(self) -> int:
        return self.train.n_samples


@dataclass
class ExperimentResult:
    """Traces of one ``run_experiment`` call and the files written for them."""

    traces: dict[int, RunTrace] = field(default_factory=dict)
    files: list[str] = field(default_factory=list)
    mean_rows: list[dict] = field(default_factory=list)


def load_dataset(config: ExperimentConfig) -> Dataset:
    """Loads or generates the raw dataset described by the config."""
    source = config.dataset
    if isinstance(source, LibsvmSource):
        return load_libsvm(source.path, source.n_features, source.normalize_labels)
    if isinstance(source, SyntheticLogisticSource):
        return synth_logistic(source.n, source.d, source.separability, source.seed, source.decay)
    return synth_ridge(source.n, source.d, source.noise, source.seed, source.decay)


def loss_term_effective_dimension(obj: Objective, data, w: np.ndarray) -> float:
    """Effective dimension of the loss-term Hessian (regularizer excluded) at w."""
    factor = sqrt_hessian(obj, data, w).factor
    return effective_dimension(factor.T @ factor, obj.lam)


def prepare_problem(config: ExperimentConfig) -> Problem:
    """
    Builds the shared problem and its reference optimum.

    Raises:
        DataError: Unreadable dataset, bad labels or partition
        ReferenceOptimumError: If the reference optimum does not converge
    """
    logger.info(f"Preparing experiment {config.name}")
    dataset = load_dataset(config)
    train, test = train_test_split(dataset, config.test_fraction, config.partition.seed)

    spec = config.feature_map
    fm = make_feature_map(spec.kind, train.feature_dim, spec.output_dim, spec.bandwidth, spec.seed)
    train = apply_feature_map(fm, train)
    if test is not None:
        test = apply_feature_map(fm, test)

    obj = Objective(config.objective.family, config.objective.lam)
    plan = PartitionPlan(
        config.partition.strategy,
        config.partition.m,
        config.partition.dirichlet_alpha,
        config.partition.seed,
    )
    shards = partition(train, plan)
    pooled = pool_shards(shards)

    reference = reference_optimum(obj, pooled)
    reference_loss = loss(obj, pooled, reference.w)
    w0 = np.zeros(train.feature_dim)
    d_eff = loss_term_effective_dimension(obj, pooled, w0)
    logger.info(
        f"N={train.n_samples}, M={train.feature_dim}, m={plan.m}, lam={obj.lam:g}, "
        f"effective dimension {d_eff:.3f}, reference loss {reference_loss:.12e}"
    )
    return Problem(obj, shards, train, test, reference, reference_loss, w0, d_eff)


def run_single(
    config: ExperimentConfig, problem: Problem, seed: int, sketch_size: int | None = None
) -> RunTrace:
    """Runs the configured algorithm once; ``sketch_size`` overrides FedNS's k."""
    algorithm = config.algorithm
    common = dict(reference=problem.reference, test=problem.test)
    if isinstance(algorithm, FedNSSpec):
        k = sketch_size or algorithm.resolve_sketch_size(problem.M)
        return fedns_run(
            problem.shards,
            problem.obj,
            problem.w0,
            mu=algorithm.mu,
            k=k,
            T=algorithm.rounds,
            seed=seed,
            kind=algorithm.sketch_kind,
            **common,
        )
    if isinstance(algorithm, FedNDESSpec):
        return fedndes_run(
            problem.shards,
            problem.obj,
            problem.w0,
            cfg=algorithm.fedndes,
            T_max=algorithm.rounds,
            seed=seed,
            kind=algorithm.sketch_kind,
            **common,
        )
    if isinstance(algorithm, FedNewtonSpec):
        return fednewton_run(
            problem.shards, problem.obj, problem.w0, mu=algorithm.mu, T=algorithm.rounds, **common
        )
    if isinstance(algorithm, FedAvgSpec):
        return fedavg_baseline_run(
            problem.shards,
            problem.obj,
            problem.w0,
            local_steps=algorithm.local_steps,
            step_size=algorithm.step_size,
            T=algorithm.rounds,
            seed=seed,
            **common,
        )
    raise ConfigError(f"Unsupported algorithm {algorithm!r}")


def _requested_sketch_size(config: ExperimentConfig, problem: Problem) -> int | None:
    algorithm = config.algorithm
    if isinstance(algorithm, FedNSSpec):
        return algorithm.resolve_sketch_size(problem.M)
    if isinstance(algorithm, FedNDESSpec):
        return algorithm.fedndes.mbar1 or max(1, math.ceil(FEDNDES_MBAR1_FACTOR * problem.effective_dimension))
    return None


def trace_header(
    config: ExperimentConfig, problem: Problem, trace: RunTrace, seed: int | None
) -> dict:
    """JSON sidecar contents: provenance, problem sizes and the communication summary."""
    ledger = communication_ledger(trace)
    return {
        "config_hash": config.config_hash(),
        "experiment": config.name,
        "dataset": problem.train.name,
        "seed": seed,
        "algorithm": trace.algorithm,
        "k": _requested_sketch_size(config, problem),
        "m": trace.m,
        "M": trace.M,
        "N": problem.N,
        "lam": problem.obj.lam,
        "loss_family": problem.obj.family.value,
        "effective_dimension": problem.effective_dimension,
        "reference_loss": problem.reference_loss,
        "rounds": trace.rows[-1].round,
        "exited": trace.exited,
        "max_rounds_reached": trace.max_rounds_reached,
        "communication": {
            "scalars_up": ledger.total_up,
            "scalars_down": ledger.total_down,
            "bytes_up": ledger.bytes_up,
            "bytes_down": ledger.bytes_down,
            "matches_formula": ledger.matches_formula,
        },
    }


def _run_seeds(
    config: ExperimentConfig,
    problem: Problem,
    seeds: list[int],
    threads: int,
    sketch_size: int | None = None,
) -> dict[int, RunTrace]:
    if threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {seed: pool.submit(run_single, config, problem, seed, sketch_size) for seed in seeds}
            return {seed: futures[seed].result() for seed in seeds}
    return {seed: run_single(config, problem, seed, sketch_size) for seed in seeds}


def run_experiment(
    config: ExperimentConfig,
    out_dir: str,
    seeds: list[int] | None = None,
    threads: int = 1,
) -> ExperimentResult:
    """
    Runs every seed and writes ``trace_seed<seed>.csv/.json`` plus
    ``trace_mean.csv/.json`` into out_dir.

    Args:
        config: Validated experiment config
        out_dir: Output directory
        seeds: Overrides config.seeds
        threads: Seeds run concurrently on this many threads

    Returns:
        ExperimentResult
    """
    seeds = list(seeds or config.seeds)
    problem = prepare_problem(config)
    traces = _run_seeds(config, problem, seeds, threads)

    result = ExperimentResult(traces=traces)
    per_seed_rows = []
    for seed in seeds:
        trace = traces[seed]
        rows = trace_rows(trace)
        per_seed_rows.append(rows)
        header = trace_header(config, problem, trace, seed)
        result.files.extend(write_trace(os.path.join(out_dir, f"trace_seed{seed}"), header, rows))

    result.mean_rows = mean_rows(per_seed_rows)
    mean_header = trace_header(config, problem, traces[seeds[0]], None)
    mean_header.update(seeds=seeds, aggregate="mean")
    result.files.extend(write_trace(os.path.join(out_dir, "trace_mean"), mean_header, result.mean_rows))

    final = result.mean_rows[-1]
    logger.info(
        f"{config.name}: {len(seeds)} runs written to {out_dir}; "
        f"mean final gap {final['optimal_gap']:.3e}"
    )
    return result


def sweep_sketch_size(
    config: ExperimentConfig,
    k_values: list[int] | None,
    out_dir: str,
    seeds: list[int] | None = None,
    threads: int = 1,
) -> list[dict]:
    """
    Mean final gap over seeds for each FedNS sketch size, written to
    ``sweep_k.csv`` (columns SWEEP_COLUMNS) with a JSON sidecar.

    Raises:
        ConfigError: Empty k list, k < 1, or a non-FedNS algorithm
    """
    k_values = list(k_values if k_values is not None else (config.sweep_k_values or []))
    if not k_values:
        raise ConfigError("sweep-k needs at least one sketch size")
    if any(k < 1 for k in k_values):
        raise ConfigError(f"Sketch sizes must be positive, got {k_values}")
    if not isinstance(config.algorithm, FedNSSpec):
        raise ConfigError(f"sweep-k runs FedNS only, config uses {config.algorithm.name}")

    seeds = list(seeds or config.seeds)
    problem = prepare_problem(config)
    summary = []
    for k in k_values:
        traces = _run_seeds(config, problem, seeds, threads, sketch_size=k)
        finals = [traces[seed].rows[-1] for seed in seeds]
        gaps = [row.optimal_gap for row in finals]
        summary.append(
            {
                "sketch_size": k,
                "mean_final_gap": float(np.mean(gaps)),
                "min_final_gap": float(np.min(gaps)),
                "max_final_gap": float(np.max(gaps)),
                "mean_final_accuracy": float(np.mean([row.test_accuracy for row in finals])),
                "mean_scalars_up": float(
                    np.mean([communication_ledger(traces[seed]).total_up for seed in seeds])
                ),
            }
        )
        logger.info(f"sweep-k: k={k} mean final gap {summary[-1]['mean_final_gap']:.3e}")

    write_csv(os.path.join(out_dir, "sweep_k.csv"), SWEEP_COLUMNS, summary)
    write_header(
        os.path.join(out_dir, "sweep_k.json"),
        {
            "config_hash": config.config_hash(),
            "experiment": config.name,
            "k_values": k_values,
            "seeds": seeds,
            "rounds": config.algorithm.rounds,
            "m": len(problem.shards),
            "M": problem.M,
            "N": problem.N,
            "effective_dimension": problem.effective_dimension,
        },
    )
    return summary


@dataclass(frozen=True)
class EffectiveDimensionReport:
    """Effective dimension at w0 with the sketch sizes it suggests."""

    effective_dimension: float
    M: int
    N: int
    lam: float
    suggested_mbar1: int
    suggested_mbar2: int

    def format(self) -> str:
        return (
            f"effective dimension: {self.effective_dimension:.6f}\n"
            f"M (model dimension): {self.M}\n"
            f"N (training samples): {self.N}\n"
            f"lambda: {self.lam:g}\n"
            f"suggested FedNDES sketch sizes: mbar1={self.suggested_mbar1}, "
            f"mbar2={self.suggested_mbar2}"
        )


def estimate_effective_dimension(config: ExperimentConfig) -> EffectiveDimensionReport:
    """Builds the training data and reports the loss-term effective dimension at w0 = 0."""
    dataset = load_dataset(config)
    train, _ = train_test_split(dataset, config.test_fraction, config.partition.seed)
    spec = config.feature_map
    fm = make_feature_map(spec.kind, train.feature_dim, spec.output_dim, spec.bandwidth, spec.seed)
    train = apply_feature_map(fm, train)
    obj = Objective(config.objective.family, config.objective.lam)

    d_eff = loss_term_effective_dimension(obj, train, np.zeros(train.feature_dim))
    return EffectiveDimensionReport(
        effective_dimension=d_eff,
        M=train.feature_dim,
        N=train.n_samples,
        lam=obj.lam,
        suggested_mbar1=max(1, math.ceil(FEDNDES_MBAR1_FACTOR * d_eff)),
        suggested_mbar2=max(1, math.ceil(FEDNDES_MBAR2_FACTOR * d_eff)),
    )
