"""Fast Walsh-Hadamard transform."""

import numpy as np


def next_power_of_two(n: int) -> int:
    """Smallest power of two that is >= n (n >= 1)."""
    return 1 << (int(n) - 1).bit_length()


def fwht(a: np.ndarray) -> np.ndarray:
    """
    Unnormalized Walsh-Hadamard transform along axis 0 in natural (Sylvester)
    order, i.e. returns W @ a with W = [[W', W'], [W', -W']] and W W^T = n I.

    Args:
        a: Array whose first dimension is a power of two

    Returns:
        New array with the same shape as ``a``

    Raises:
        ValueError: If the first dimension is not a power of two
    """
    x = np.array(a, dtype=float, copy=True)
    n = x.shape[0]
    if n < 1 or n & (n - 1):
        raise ValueError(f"fwht needs a power-of-two leading dimension, got {n}")
    rest = x.shape[1:]
    h = 1
    while h < n:
        blocks = x.reshape(n // (2 * h), 2, h, *rest)
        top = blocks[:, 0] + blocks[:, 1]
        bottom = blocks[:, 0] - blocks[:, 1]
        x = np.stack((top, bottom), axis=1).reshape(n, *rest)
        h *= 2
    return x
