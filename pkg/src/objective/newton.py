"""
Centralized Newton Module

Exact Newton's method on the pooled data (the reference-optimum oracle for every
federated run) and the closed-form kernel ridge solution.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.constants import (
    FEDNDES_ARMIJO_A,
    FEDNDES_BACKTRACK_B,
    MAX_BACKTRACKS,
    PURE_NEWTON_DECREMENT,
    REFERENCE_MAX_ITER,
    REFERENCE_TOL,
)
from src.errors import LineSearchError, NumericalError, ReferenceOptimumError
from src.objective.glm import LabeledData, Objective, gradient, hessian, loss
from src.objective.linalg import solve_psd

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ModelState:
    """
    Global iterate and the round (iteration) that produced it.

    Attributes:
        w: Weight vector of length M (read-only copy)
        round: Iteration index t
    """

    w: np.ndarray
    round: int = 0

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise NumericalError(f"Non-finite iterate at round {self.round}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class NewtonIterate:
    """One row of the centralized Newton trace."""

    iteration: int
    loss: float
    grad_norm: float
    step_size: float


@dataclass(frozen=True, eq=False)
class NewtonResult:
    """
    Outcome of ``centralized_newton``.

    Attributes:
        state: Final iterate
        trace: One entry per visited iterate, starting with w0
        converged: Whether the gradient-norm tolerance was reached
    """

    state: ModelState
    trace: list[NewtonIterate] = field(default_factory=list)
    converged: bool = False


def _backtrack(obj, data, w, direction, value, slope, a, b) -> float:
    step = 1.0
    for _ in range(MAX_BACKTRACKS):
        if loss(obj, data, w + step * direction) <= value + a * step * slope:
            return step
        step *= b
    raise LineSearchError(f"Damped Newton step not found after {MAX_BACKTRACKS} backtracks")


def centralized_newton(
    obj: Objective,
    data: LabeledData,
    w0: np.ndarray,
    mu: float = 1.0,
    tol: float = REFERENCE_TOL,
    max_iter: int = REFERENCE_MAX_ITER,
    line_search: bool = False,
    a: float = FEDNDES_ARMIJO_A,
    b: float = FEDNDES_BACKTRACK_B,
) -> NewtonResult:
    """
    Runs w <- w - mu * H^{-1} g until ||g|| <= tol or max_iter steps.

    Args:
        obj: Objective
        data: Pooled data
        w0: Starting point
        mu: Fixed step size (ignored while the damped search is active)
        tol: Gradient-norm tolerance
        max_iter: Maximum number of Newton steps
        line_search: Use Armijo backtracking from a full step while the Newton
                     decrement exceeds PURE_NEWTON_DECREMENT
        a: Armijo slope for the damped search
        b: Backtracking factor for the damped search

    Returns:
        NewtonResult; non-convergence is flagged (converged=False), not raised

    Raises:
        HessianSolveError: If a Newton system cannot be solved
    """
    w = np.array(w0, dtype=float)
    trace: list[NewtonIterate] = []
    step = float("nan")
    converged = False
    iteration = 0
    while True:
        g = gradient(obj, data, w)
        value = loss(obj, data, w)
        grad_norm = float(np.linalg.norm(g))
        trace.append(NewtonIterate(iteration, value, grad_norm, step))
        if grad_norm <= tol:
            converged = True
            break
        if iteration >= max_iter:
            break

        direction = -solve_psd(hessian(obj, data, w), g)
        slope = float(g @ direction)
        step = mu
        if line_search and -slope > PURE_NEWTON_DECREMENT:
            step = _backtrack(obj, data, w, direction, value, slope, a, b)
        w = w + step * direction
        iteration += 1

    if not converged:
        logger.warning(
            f"Centralized Newton stopped after {iteration} iterations with "
            f"||g|| = {trace[-1].grad_norm:.3e} > {tol:.1e}"
        )
    return NewtonResult(state=ModelState(w, iteration), trace=trace, converged=converged)


def reference_optimum(
    obj: Objective,
    data: LabeledData,
    w0: np.ndarray | None = None,
    tol: float = REFERENCE_TOL,
    max_iter: int = REFERENCE_MAX_ITER,
) -> ModelState:
    """
    Reference optimum w* used by every optimal-gap metric (damped Newton).

    Raises:
        ReferenceOptimumError: If the tolerance is not reached within max_iter
    """
    if w0 is None:
        w0 = np.zeros(np.asarray(data.features).shape[1])
    result = centralized_newton(obj, data, w0, tol=tol, max_iter=max_iter, line_search=True)
    if not result.converged:
        raise ReferenceOptimumError(
            f"Reference optimum not reached: ||g|| = {result.trace[-1].grad_norm:.3e} "
            f"after {max_iter} iterations"
        )
    logger.debug(
        f"Reference optimum after {result.state.round} iterations, "
        f"loss = {result.trace[-1].loss:.16e}"
    )
    return result.state


def krr_closed_form(data: LabeledData, lam: float) -> np.ndarray:
    """
    Closed-form ridge / kernel ridge solution w = (Phi^T Phi + lam N I)^{-1} Phi^T y.

    This is the minimizer of (1/N) sum 0.5 (phi_i^T w - y_i)^2 + 0.5 lam ||w||^2,
    i.e. the squared-loss Objective with the same lam.
    """
    Phi = np.asarray(data.features, dtype=float)
    y = np.asarray(data.labels, dtype=float)
    N, M = Phi.shape
    A = Phi.T @ Phi
    A = 0.5 * (A + A.T)
    A[np.diag_indices_from(A)] += lam * N
    return solve_psd(A, Phi.T @ y)
