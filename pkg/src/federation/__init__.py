"""Simulated federation: FedNewton, FedNS, FedNDES and the FedAvg baseline."""

from src.federation.algorithms import (
    fedavg_baseline_run,
    fedndes_run,
    fedndes_sketch_sizes,
    fednewton_round,
    fednewton_run,
    fedns_round,
    fedns_run,
)
from src.federation.config import ExitRule, FedNDESConfig
from src.federation.ledger import (
    LedgerSummary,
    communication_ledger,
    predicted_scalars_down,
    predicted_scalars_up,
)
from src.federation.metrics import Evaluator, RoundMetrics, RoundUpload, RunTrace, zero_one_accuracy
from src.federation.server import (
    Federation,
    aggregate_sketched_hessian,
    aggregate_weighted,
    newton_decrement,
    newton_direction,
)
from src.federation.worker import (
    armijo_predicate,
    local_gradient_descent,
    local_line_search,
    local_sketch_round,
    sketch_upload,
    worker_sketch,
)

__all__ = [
    "Evaluator",
    "ExitRule",
    "FedNDESConfig",
    "Federation",
    "LedgerSummary",
    "RoundMetrics",
    "RoundUpload",
    "RunTrace",
    "aggregate_sketched_hessian",
    "aggregate_weighted",
    "armijo_predicate",
    "communication_ledger",
    "fedavg_baseline_run",
    "fedndes_run",
    "fedndes_sketch_sizes",
    "fednewton_round",
    "fednewton_run",
    "fedns_round",
    "fedns_run",
    "local_gradient_descent",
    "local_line_search",
    "local_sketch_round",
    "newton_decrement",
    "newton_direction",
    "predicted_scalars_down",
    "predicted_scalars_up",
    "sketch_upload",
    "worker_sketch",
    "zero_one_accuracy",
]
