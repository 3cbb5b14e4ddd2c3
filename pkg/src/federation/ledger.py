"""
Communication Ledger Module

Closed-form communication counts per algorithm, checked against the upload
buffer sizes measured during a run. Scalars are 64-bit floats.
"""

import logging
from dataclasses import dataclass

from src.constants import BYTES_PER_SCALAR
from src.federation.metrics import RoundUpload, RunTrace

logger = logging.getLogger(__name__)


def predicted_scalars_up(algorithm: str, m: int, M: int, upload: RoundUpload) -> int:
    """
    Uploaded floats of one round as the algorithm prescribes:

    - fedns: sum_j (k_j M + M)
    - fednewton: m (M^2 + M)
    - fedavg: m M
    - fedndes: sum_j (k_j M + M) + m step sizes (no step sizes on the exit round)

    k_j is derived from the requested sketch size and the shard sizes, never from
    the uploaded buffers.
    """
    if algorithm == "fednewton":
        return m * (M * M + M)
    if algorithm == "fedavg":
        return m * M
    sketched = sum(rows * M + M for rows in upload.expected_rows)
    if algorithm == "fedns":
        return sketched
    if algorithm == "fedndes":
        return sketched if upload.exit_round else sketched + m
    raise ValueError(f"Unknown algorithm {algorithm!r}")


def predicted_scalars_down(algorithm: str, M: int, upload: RoundUpload) -> int:
    """Broadcast floats of one round (the model, or Delta w, decrement, w and k)."""
    if algorithm == "fedndes":
        return 0 if upload.exit_round else 2 * (M + 1)
    return M


@dataclass(frozen=True)
class LedgerSummary:
    """
    Attributes:
        algorithm: Algorithm name
        per_round_up: Measured uploaded floats of rounds 1..T
        per_round_down: Broadcast floats of rounds 1..T
        cumulative_up: Running total of per_round_up
        total_up: Uploaded floats over the run
        total_down: Broadcast floats over the run
        bytes_up: total_up * 8
        bytes_down: total_down * 8
        matches_formula: Every measured round equals its closed-form count
    """

    algorithm: str
    per_round_up: list[int]
    per_round_down: list[int]
    cumulative_up: list[int]
    total_up: int
    total_down: int
    bytes_up: int
    bytes_down: int
    matches_formula: bool


def communication_ledger(trace: RunTrace) -> LedgerSummary:
    """
    Summarizes the communication of a run.

    Measured counts come from the upload buffers recorded in the trace; each round
    is cross-checked against ``predicted_scalars_up`` and the broadcast column
    against ``predicted_scalars_down``.
    """
    per_round_up = [row.scalars_up for row in trace.rows[1:]]
    per_round_down = [row.scalars_down for row in trace.rows[1:]]

    matches = len(trace.uploads) == len(per_round_up)
    for upload, up, down in zip(trace.uploads, per_round_up, per_round_down):
        expected_up = predicted_scalars_up(trace.algorithm, trace.m, trace.M, upload)
        expected_down = predicted_scalars_down(trace.algorithm, trace.M, upload)
        if (upload.total, up, down) != (expected_up, expected_up, expected_down):
            logger.warning(
                f"{trace.algorithm} round {upload.round}: measured {upload.total} up / {down} down, "
                f"expected {expected_up} / {expected_down}"
            )
            matches = False

    cumulative, running = [], 0
    for up in per_round_up:
        running += up
        cumulative.append(running)

    total_up = sum(per_round_up)
    total_down = sum(per_round_down)
    return LedgerSummary(
        algorithm=trace.algorithm,
        per_round_up=per_round_up,
        per_round_down=per_round_down,
        cumulative_up=cumulative,
        total_up=total_up,
        total_down=total_down,
        bytes_up=total_up * BYTES_PER_SCALAR,
        bytes_down=total_down * BYTES_PER_SCALAR,
        matches_formula=matches,
    )
