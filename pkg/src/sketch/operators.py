"""
Sketch Operators Module

Construction and application of the randomized embeddings S in R^{k x n} used to
compress a worker's square-root Hessian before upload.

All kinds are normalized so that E[S^T S] = I_n:

- gaussian: i.i.d. N(0, 1) entries divided by sqrt(k)
- srht: S = sqrt(n_pad / k) * P * (W / sqrt(n_pad)) * D on the zero-padded input,
  with D a Rademacher sign diagonal, W the unnormalized Walsh-Hadamard matrix of
  order n_pad (next power of two >= n) and P a uniform sample of k distinct rows
  (without replacement); the net row scale is 1 / sqrt(k)
- sjlt: one nonzero per column, value +-1, at a uniformly chosen row
- identity: S = I_n (k must equal n)
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse

from src.constants import MATERIALIZE_MAX_ENTRIES
from src.errors import SketchError
from src.sketch.hadamard import fwht, next_power_of_two
from src.sketch.rng import make_rng


class SketchKind(str, Enum):
    """Supported sketch families."""

    GAUSSIAN = "gaussian"
    SRHT = "srht"
    SJLT = "sjlt"
    IDENTITY = "identity"


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SketchOperator:
    """
    Immutable seeded sketch. Only the randomness of the chosen kind is stored;
    the dense matrix is built on demand by ``materialize``.

    Attributes:
        kind: Sketch family
        k: Number of sketch rows
        n: Number of input rows
        seed: 64-bit seed the randomness was drawn from
        gaussian: Dense k x n entries (gaussian only)
        signs: Rademacher signs, length n_pad (srht) or n (sjlt)
        indices: Sampled Hadamard rows, length k (srht only)
        target_rows: Row receiving each column's nonzero (sjlt only)
    """

    kind: SketchKind
    k: int
    n: int
    seed: int
    gaussian: np.ndarray | None = field(default=None, repr=False)
    signs: np.ndarray | None = field(default=None, repr=False)
    indices: np.ndarray | None = field(default=None, repr=False)
    target_rows: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_pad(self) -> int:
        """Zero-padded input length used by the SRHT."""
        return next_power_of_two(self.n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.k, self.n)


def _coerce_kind(kind) -> SketchKind:
    try:
        return SketchKind(kind)
    except ValueError:
        valid = ", ".join(k.value for k in SketchKind)
        raise SketchError(f"Invalid sketch kind {kind!r}; expected one of: {valid}") from None


def sketch_rows_for(kind, k: int, n: int) -> int:
    """
    Number of rows a sketch of the requested size actually has on an input of n
    rows: the identity always has n, the SRHT at most n_pad.
    """
    kind = _coerce_kind(kind)
    if kind is SketchKind.IDENTITY:
        return n
    if kind is SketchKind.SRHT:
        return min(k, next_power_of_two(n))
    return k


def make_sketch(kind, k: int, n: int, seed: int) -> SketchOperator:
    """
    Draws a sketch operator.

    Args:
        kind: SketchKind or its string value
        k: Sketch rows (>= 1)
        n: Input rows (>= 1)
        seed: Non-negative 64-bit seed; the same (kind, k, n, seed) always yields
              a bit-identical operator

    Returns:
        SketchOperator

    Raises:
        SketchError: Invalid kind, zero sizes, k > n_pad for srht, k != n for identity
    """
    kind = _coerce_kind(kind)
    k, n = int(k), int(n)
    if k < 1 or n < 1:
        raise SketchError(f"Sketch sizes must be positive, got k={k}, n={n}")

    if kind is SketchKind.IDENTITY:
        if k != n:
            raise SketchError(f"Identity sketch needs k == n, got k={k}, n={n}")
        return SketchOperator(kind=kind, k=k, n=n, seed=seed)

    rng = make_rng(seed)
    if kind is SketchKind.GAUSSIAN:
        entries = rng.standard_normal((k, n)) / math.sqrt(k)
        return SketchOperator(kind=kind, k=k, n=n, seed=seed, gaussian=_readonly(entries))

    if kind is SketchKind.SRHT:
        n_pad = next_power_of_two(n)
        if k > n_pad:
            raise SketchError(f"SRHT samples without replacement: k={k} exceeds n_pad={n_pad}")
        signs = rng.integers(0, 2, size=n_pad).astype(float) * 2.0 - 1.0
        indices = rng.choice(n_pad, size=k, replace=False)
        return SketchOperator(
            kind=kind,
            k=k,
            n=n,
            seed=seed,
            signs=_readonly(signs),
            indices=_readonly(indices),
        )

    # SJLT
    target_rows = rng.integers(0, k, size=n)
    signs = rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0
    return SketchOperator(
        kind=kind,
        k=k,
        n=n,
        seed=seed,
        signs=_readonly(signs),
        target_rows=_readonly(target_rows),
    )


def _sjlt_matrix(S: SketchOperator) -> sparse.csr_matrix:
    return sparse.csr_matrix((S.signs, (S.target_rows, np.arange(S.n))), shape=(S.k, S.n))


def apply_sketch(S: SketchOperator, A: np.ndarray) -> np.ndarray:
    """
    Computes S @ A without forming S densely (srht: sign flip, fast
    Walsh-Hadamard transform of the zero-padded columns, row subsample, scale).

    Args:
        S: Sketch operator
        A: Matrix with exactly S.n rows (a vector is treated as one column)

    Returns:
        k x M matrix (or length-k vector for vector input)

    Raises:
        SketchError: If A does not have S.n rows
    """
    A = np.asarray(A, dtype=float)
    vector_input = A.ndim == 1
    if vector_input:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or A.shape[0] != S.n:
        raise SketchError(f"Sketch expects {S.n} input rows, got shape {A.shape}")

    if S.kind is SketchKind.IDENTITY:
        result = A.copy()
    elif S.kind is SketchKind.GAUSSIAN:
        result = S.gaussian @ A
    elif S.kind is SketchKind.SRHT:
        padded = np.zeros((S.n_pad, A.shape[1]))
        padded[: S.n] = A * S.signs[: S.n, None]
        result = fwht(padded)[S.indices] / math.sqrt(S.k)
    else:
        result = np.asarray(_sjlt_matrix(S) @ A)

    return result.ravel() if vector_input else result


def materialize(S: SketchOperator) -> np.ndarray:
    """
    Dense k x n matrix whose action equals ``apply_sketch``. Intended as a
    testing oracle.

    Raises:
        SketchError: If k * n exceeds MATERIALIZE_MAX_ENTRIES
    """
    if S.k * S.n > MATERIALIZE_MAX_ENTRIES:
        raise SketchError(
            f"Refusing to materialize a {S.k} x {S.n} sketch "
            f"(limit {MATERIALIZE_MAX_ENTRIES} entries)"
        )
    if S.kind is SketchKind.IDENTITY:
        return np.eye(S.n)
    if S.kind is SketchKind.GAUSSIAN:
        return np.array(S.gaussian)
    if S.kind is SketchKind.SJLT:
        return _sjlt_matrix(S).toarray()
    return apply_sketch(S, np.eye(S.n))
