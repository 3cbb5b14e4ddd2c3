"""
Linear Algebra Helpers

Symmetric positive (semi)definite solves with jitter escalation and the
empirical effective dimension.
"""

import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from src.constants import JITTER_ESCALATIONS, JITTER_SCALE
from src.errors import HessianSolveError

logger = logging.getLogger(__name__)


def solve_psd(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """
    Solves H x = g for symmetric positive definite H via Cholesky.

    On factorization failure a diagonal jitter of JITTER_SCALE * tr(H) / M is
    added and escalated tenfold, at most JITTER_ESCALATIONS times.

    Args:
        H: M x M symmetric matrix
        g: Right-hand side of length M

    Returns:
        Solution vector

    Raises:
        HessianSolveError: Non-finite input, or factorization failing after all
                           escalations
    """
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float)
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(g))):
        raise HessianSolveError("Hessian or gradient contains non-finite entries")

    M = H.shape[0]
    base_jitter = JITTER_SCALE * max(float(np.trace(H)) / M, np.finfo(float).tiny)
    for attempt in range(JITTER_ESCALATIONS + 1):
        shift = 0.0 if attempt == 0 else base_jitter * 10.0 ** (attempt - 1)
        try:
            factor = cho_factor(H + shift * np.eye(M), lower=True, check_finite=False)
        except LinAlgError:
            logger.warning(f"Cholesky failed (attempt {attempt + 1}); escalating jitter")
            continue
        x = cho_solve(factor, g, check_finite=False)
        if np.all(np.isfinite(x)):
            return x
    raise HessianSolveError(
        f"Hessian factorization failed after {JITTER_ESCALATIONS} jitter escalations"
    )


def effective_dimension(H: np.ndarray, lam: float) -> float:
    """
    Empirical effective dimension Tr(H (H + lam I)^{-1}) of a loss-term Hessian.

    Args:
        H: Symmetric PSD matrix (regularizer excluded)
        lam: Regularization weight (> 0)

    Returns:
        Value in [0, M]
    """
    if lam <= 0:
        raise ValueError(f"Effective dimension needs lam > 0, got {lam}")
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {H.shape}")
    eigenvalues = np.clip(eigvalsh(0.5 * (H + H.T)), 0.0, None)
    return float(np.sum(eigenvalues / (eigenvalues + lam)))
