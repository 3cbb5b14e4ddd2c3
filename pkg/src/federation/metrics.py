"""
Round Metrics Module

Per-round instrumentation of a federated run. Row t of a trace describes the
iterate w_t measured on the full training data, together with the decrement,
step size and communication of the round that produced it. Row 0 is the
starting point (no communication, NaN decrement and step).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from src.objective import LabeledData, LossFamily, ModelState, Objective, gradient, loss
from src.sketch import sketch_rows_for


@dataclass(frozen=True)
class RoundMetrics:
    """
    Attributes:
        round: Round index t
        loss: L(D, w_t)
        optimal_gap: L(D, w_t) - L(D, w*)
        grad_norm: ||grad L(D, w_t)||
        decrement: Approximate Newton decrement computed in round t (NaN if none)
        step_size: Step mu applied in round t (0 on a FedNDES exit round)
        sketch_size: Requested sketch rows k_t (0 for unsketched methods)
        scalars_up: Floats uploaded in round t, summed over workers
        scalars_down: Floats broadcast in round t (counted once)
        test_accuracy: 0/1 accuracy on the held-out split (NaN when absent)
        wall_ns: Wall-clock duration of the round; kept in memory only
    """

    round: int
    loss: float
    optimal_gap: float
    grad_norm: float
    decrement: float = math.nan
    step_size: float = math.nan
    sketch_size: int = 0
    scalars_up: int = 0
    scalars_down: int = 0
    test_accuracy: float = math.nan
    wall_ns: int = 0


@dataclass(frozen=True)
class RoundUpload:
    """
    Measured upload buffers of one round, with the sketch request they answer.

    Attributes:
        round: Round index t
        worker_scalars: Floats uploaded by each worker, in worker order
        sketch_rows: Sketch rows each worker actually uploaded (empty for unsketched methods)
        requested_k: Sketch size the server asked for (0 for unsketched methods)
        sketch_kind: Sketch family of the request
        shard_sizes: n_j per worker, in worker order
        exit_round: Whether the round ended in a FedNDES exit
    """

    round: int
    worker_scalars: tuple[int, ...]
    sketch_rows: tuple[int, ...] = ()
    requested_k: int = 0
    sketch_kind: str | None = None
    shard_sizes: tuple[int, ...] = ()
    exit_round: bool = False

    @property
    def total(self) -> int:
        return sum(self.worker_scalars)

    @property
    def expected_rows(self) -> tuple[int, ...]:
        """Rows each worker owes for ``requested_k``, independent of what it sent."""
        if self.sketch_kind is None:
            return ()
        return tuple(sketch_rows_for(self.sketch_kind, self.requested_k, n) for n in self.shard_sizes)


@dataclass(eq=False)
class RunTrace:
    """
    Full record of one federated run.

    Attributes:
        algorithm: fednewton, fedns, fedndes or fedavg
        m: Number of workers
        M: Model dimension
        rows: RoundMetrics, one per iterate, strictly ordered by round
        iterates: w_t for every row
        uploads: Measured upload buffers for rounds 1..T
        exited: FedNDES stopped on its decrement test
        max_rounds_reached: FedNDES ran out of rounds without exiting
    """

    algorithm: str
    m: int
    M: int
    rows: list[RoundMetrics] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)
    uploads: list[RoundUpload] = field(default_factory=list)
    exited: bool = False
    max_rounds_reached: bool = False

    @property
    def final_state(self) -> ModelState:
        return ModelState(self.iterates[-1], self.rows[-1].round)

    @property
    def gaps(self) -> np.ndarray:
        return np.array([row.optimal_gap for row in self.rows])

    def record(self, row: RoundMetrics, w: np.ndarray, upload: RoundUpload | None = None) -> None:
        if self.rows and row.round <= self.rows[-1].round:
            raise ValueError(f"Round {row.round} recorded after round {self.rows[-1].round}")
        self.rows.append(row)
        self.iterates.append(np.array(w, dtype=float))
        if upload is not None:
            self.uploads.append(upload)


def zero_one_accuracy(data: LabeledData, w: np.ndarray) -> float:
    """Fraction of samples with sign(x^T w) == y (ties predict +1)."""
    predictions = np.where(np.asarray(data.features) @ w >= 0.0, 1.0, -1.0)
    return float(np.mean(predictions == np.asarray(data.labels)))


@dataclass(frozen=True, eq=False)
class Evaluator:
    """
    Measures iterates on the pooled training data.

    Attributes:
        obj: Objective
        data: Full training data D
        reference_loss: L(D, w*)
        test: Optional held-out split (accuracy reported for logistic objectives)
    """

    obj: Objective
    data: LabeledData
    reference_loss: float
    test: LabeledData | None = None

    def measure(self, t: int, w: np.ndarray, **round_fields) -> RoundMetrics:
        value = loss(self.obj, self.data, w)
        accuracy = math.nan
        if self.test is not None and self.obj.family is LossFamily.LOGISTIC:
            accuracy = zero_one_accuracy(self.test, w)
        return RoundMetrics(
            round=t,
            loss=value,
            optimal_gap=value - self.reference_loss,
            grad_norm=float(np.linalg.norm(gradient(self.obj, self.data, w))),
            test_accuracy=accuracy,
            **round_fields,
        )
