"""
Synthetic benchmark problems with a polynomially decaying feature spectrum.
"""

import numpy as np
from scipy.special import expit

from src.constants import STREAM_SYNTHETIC
from src.data.dataset import Dataset
from src.sketch import make_rng


def _decaying_design(rng: np.random.Generator, n: int, d: int, decay: float):
    w_true = rng.standard_normal(d)
    w_true /= np.linalg.norm(w_true)
    # covariance eigenvalues i^(-decay), i = 1..d
    scales = np.arange(1, d + 1, dtype=float) ** (-decay / 2.0)
    X = rng.standard_normal((n, d)) * scales
    return X, w_true


def synth_logistic(
    n: int, d: int, separability: float, seed: int, decay: float = 2.0
) -> Dataset:
    """
    Logistic benchmark: w_true uniform on the unit sphere, x ~ N(0, diag(i^-decay))
    and P(y = +1 | x) = sigmoid(separability * x^T w_true).

    separability = 0 makes labels independent of x. Larger decay shrinks the
    effective dimension.
    """
    if n < 1 or d < 1:
        raise ValueError(f"Need n >= 1 and d >= 1, got n={n}, d={d}")
    rng = make_rng(seed, STREAM_SYNTHETIC)
    X, w_true = _decaying_design(rng, n, d, decay)
    p = expit(separability * (X @ w_true))
    y = np.where(rng.uniform(size=n) < p, 1.0, -1.0)
    return Dataset(X, y, f"synthetic-logistic-n{n}-d{d}-s{seed}")


def synth_ridge(n: int, d: int, noise: float, seed: int, decay: float = 2.0) -> Dataset:
    """Ridge benchmark with the same design and y = x^T w_true + noise * N(0, 1)."""
    if n < 1 or d < 1:
        raise ValueError(f"Need n >= 1 and d >= 1, got n={n}, d={d}")
    rng = make_rng(seed, STREAM_SYNTHETIC)
    X, w_true = _decaying_design(rng, n, d, decay)
    y = X @ w_true + noise * rng.standard_normal(n)
    return Dataset(X, y, f"synthetic-ridge-n{n}-d{d}-s{seed}")
