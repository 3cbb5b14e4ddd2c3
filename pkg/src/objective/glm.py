"""
GLM Objective Module

Regularized empirical risk

    L(D, w) = (1/n) * sum_i loss(x_i^T w, y_i) + lam * 0.5 * ||w||^2

for the logistic loss log(1 + exp(-y x^T w)) with y in {-1, +1} and the squared
loss 0.5 * (x^T w - y)^2. Exposes value, gradient, full Hessian and the
square-root factor of the loss-term Hessian that workers sketch.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np
from scipy.special import expit

from src.constants import DEFAULT_LAMBDA
from src.errors import LabelDomainError
from src.sketch import SketchOperator, apply_sketch


class LabeledData(Protocol):
    """Anything carrying a feature matrix and a label vector (Dataset, Shard)."""

    features: np.ndarray
    labels: np.ndarray


class LossFamily(str, Enum):
    """Supported loss functions."""

    LOGISTIC = "logistic"
    SQUARED = "squared"


@dataclass(frozen=True)
class Objective:
    """
    Loss family plus ridge weight. The regularizer is fixed to 0.5 * ||w||^2 so
    its Hessian is exactly the identity.

    Attributes:
        family: LossFamily
        lam: Regularization weight (>= 0; federated runs require > 0)
    """

    family: LossFamily
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        object.__setattr__(self, "family", LossFamily(self.family))
        lam = float(self.lam)
        if not np.isfinite(lam) or lam < 0:
            raise ValueError(f"Regularization weight must be finite and >= 0, got {self.lam}")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True, eq=False)
class SqrtHessianFactor:
    """
    Matrix B (n x M) with B^T B equal to the loss-term Hessian of one data block.

    Attributes:
        factor: The n x M factor D(w)^{1/2} X / sqrt(n)
        owner: Worker id of the shard it was computed on (None for full data)
    """

    factor: np.ndarray
    owner: int | None = None


def _check_labels(obj: Objective, labels: np.ndarray) -> None:
    if obj.family is LossFamily.LOGISTIC and not np.all(np.isin(labels, (-1.0, 1.0))):
        bad = np.unique(labels[~np.isin(labels, (-1.0, 1.0))])[:5]
        raise LabelDomainError(f"Logistic loss needs labels in {{-1, +1}}, found {bad.tolist()}")


def _unpack(obj: Objective, data: LabeledData, w: np.ndarray):
    X = np.asarray(data.features, dtype=float)
    y = np.asarray(data.labels, dtype=float)
    w = np.asarray(w, dtype=float)
    if X.shape[1] != w.shape[0]:
        raise ValueError(f"Model has {w.shape[0]} weights but data has {X.shape[1]} features")
    _check_labels(obj, y)
    return X, y, w


def curvature_weights(obj: Objective, data: LabeledData, w: np.ndarray) -> np.ndarray:
    """Diagonal D(w) of the loss-term Hessian X^T D X / n."""
    X, y, w = _unpack(obj, data, w)
    if obj.family is LossFamily.SQUARED:
        return np.ones(X.shape[0])
    z = y * (X @ w)
    return expit(z) * expit(-z)


def loss(obj: Objective, data: LabeledData, w: np.ndarray) -> float:
    """
    Objective value (mean loss plus ridge term).

    Raises:
        LabelDomainError: Logistic labels outside {-1, +1}
    """
    X, y, w = _unpack(obj, data, w)
    if obj.family is LossFamily.LOGISTIC:
        z = y * (X @ w)
        per_sample = np.log1p(np.exp(-np.abs(z))) + np.maximum(0.0, -z)
    else:
        per_sample = 0.5 * (X @ w - y) ** 2
    return float(np.mean(per_sample) + 0.5 * obj.lam * (w @ w))


def gradient(obj: Objective, data: LabeledData, w: np.ndarray) -> np.ndarray:
    """Gradient (1/n) sum_i grad loss_i + lam * w."""
    X, y, w = _unpack(obj, data, w)
    if obj.family is LossFamily.LOGISTIC:
        coef = -y * expit(-y * (X @ w))
    else:
        coef = X @ w - y
    return X.T @ coef / X.shape[0] + obj.lam * w


def hessian(obj: Objective, data: LabeledData, w: np.ndarray) -> np.ndarray:
    """Full Hessian X^T D(w) X / n + lam * I, symmetrized."""
    X = np.asarray(data.features, dtype=float)
    d = curvature_weights(obj, data, w)
    H = (X * d[:, None]).T @ X / X.shape[0]
    H = 0.5 * (H + H.T)
    H[np.diag_indices_from(H)] += obj.lam
    return H


def sqrt_hessian(
    obj: Objective, data: LabeledData, w: np.ndarray, owner: int | None = None
) -> SqrtHessianFactor:
    """
    Square-root factor of the loss-term Hessian only; the regularizer stays
    exact on the server (partial sketching).
    """
    X = np.asarray(data.features, dtype=float)
    d = curvature_weights(obj, data, w)
    factor = np.sqrt(d)[:, None] * X / np.sqrt(X.shape[0])
    return SqrtHessianFactor(factor=factor, owner=owner)


def sketched_hessian(
    obj: Objective, data: LabeledData, w: np.ndarray, sketch: SketchOperator
) -> np.ndarray:
    """Centralized partial Newton sketch Hessian (S B)^T (S B) + lam * I."""
    upsilon = apply_sketch(sketch, sqrt_hessian(obj, data, w).factor)
    H = upsilon.T @ upsilon
    H = 0.5 * (H + H.T)
    H[np.diag_indices_from(H)] += obj.lam
    return H
