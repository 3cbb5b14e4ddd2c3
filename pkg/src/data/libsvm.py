"""
LIBSVM Loader Module

Parsing and writing of the LIBSVM / SVMlight text format:

    <label> <index>:<value> <index>:<value> ... [# comment]

Indices are 1-based and strictly ascending; absent indices are zero. Blank and
comment-only lines carry no sample and are skipped; every other line either
parses or raises a LibsvmFormatError naming its line number.
"""

import logging
import math
import os
from typing import Iterable, TextIO

import numpy as np

from src.data.dataset import Dataset
from src.errors import DataError, LabelDomainError, LibsvmFormatError

logger = logging.getLogger(__name__)


def normalize_binary_labels(labels: np.ndarray) -> np.ndarray:
    """
    Maps binary labels to {-1, +1}: {0, 1} becomes {-1, +1}, {-1, +1} is kept.

    Raises:
        LabelDomainError: More than two classes or an unsupported label pair
    """
    labels = np.asarray(labels, dtype=float)
    classes = set(np.unique(labels).tolist())
    if classes <= {-1.0, 1.0}:
        return labels.copy()
    if classes <= {0.0, 1.0}:
        return 2.0 * labels - 1.0
    shown = sorted(classes)[:6]
    raise LabelDomainError(f"Only binary labels {{0,1}} or {{-1,+1}} are supported, found {shown}")


def _parse_number(text: str, line_number: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise LibsvmFormatError(f"non-numeric {what} {text!r}", line_number) from None
    if not math.isfinite(value):
        raise LibsvmFormatError(f"non-finite {what} {text!r}", line_number)
    return value


def parse_libsvm(
    stream: Iterable[str] | Iterable[bytes],
    name: str = "libsvm",
    n_features: int | None = None,
    normalize_labels: bool = True,
) -> Dataset:
    """
    Parses LIBSVM text into a dense Dataset.

    Args:
        stream: Text or binary stream, or any iterable of lines (LF or CRLF
                endings); byte lines are decoded as UTF-8
        name: Dataset name
        n_features: Feature dimension override; defaults to the largest index seen
        normalize_labels: Map binary labels to {-1, +1} (disable for regression)

    Returns:
        Dataset with N rows and d = n_features or max index columns

    Raises:
        LibsvmFormatError: Non-numeric token, non-ascending or non-positive index,
                           missing ':' separator, index beyond n_features, invalid UTF-8,
                           empty file, no features
        LabelDomainError: Non-binary labels with normalize_labels=True
    """
    labels: list[float] = []
    rows: list[tuple[list[int], list[float]]] = []
    max_index = 0

    for line_number, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise LibsvmFormatError(
                    f"invalid UTF-8 ({e.reason} at byte {e.start})", line_number
                ) from None
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        labels.append(_parse_number(tokens[0], line_number, "label"))

        indices: list[int] = []
        values: list[float] = []
        previous = 0
        for token in tokens[1:]:
            index_text, separator, value_text = token.partition(":")
            if not separator:
                raise LibsvmFormatError(f"expected index:value, got {token!r}", line_number)
            try:
                index = int(index_text)
            except ValueError:
                raise LibsvmFormatError(f"non-numeric index {index_text!r}", line_number) from None
            if index < 1:
                raise LibsvmFormatError(f"indices are 1-based, got {index}", line_number)
            if index <= previous:
                raise LibsvmFormatError(
                    f"non-ascending index {index} after {previous}", line_number
                )
            if n_features is not None and index > n_features:
                raise LibsvmFormatError(
                    f"index {index} exceeds n_features={n_features}", line_number
                )
            indices.append(index - 1)
            values.append(_parse_number(value_text, line_number, "value"))
            previous = index
        max_index = max(max_index, previous)
        rows.append((indices, values))

    if not labels:
        raise LibsvmFormatError("empty file")

    d = n_features if n_features is not None else max_index
    if d == 0:
        raise LibsvmFormatError("no features")
    features = np.zeros((len(rows), d))
    for row, (indices, values) in enumerate(rows):
        features[row, indices] = values

    label_array = np.asarray(labels)
    if normalize_labels:
        label_array = normalize_binary_labels(label_array)
    logger.debug(f"Parsed {len(rows)} samples with {d} features from {name}")
    return Dataset(features, label_array, name)


def load_libsvm(path: str, n_features: int | None = None, normalize_labels: bool = True) -> Dataset:
    """
    Reads a LIBSVM file from disk (UTF-8).

    Raises:
        DataError: If the file cannot be opened
        LibsvmFormatError: If a line is malformed or not valid UTF-8
    """
    try:
        with open(path, "rb") as f:
            return parse_libsvm(
                f,
                name=os.path.basename(path),
                n_features=n_features,
                normalize_labels=normalize_labels,
            )
    except OSError as e:
        raise DataError(f"Cannot read dataset {path}: {e}") from e


def write_libsvm(dataset: Dataset, stream: TextIO) -> None:
    """
    Writes a Dataset in LIBSVM format. Floats use their shortest round-trip
    representation and zero entries are omitted.
    """
    for features, label in zip(dataset.features, dataset.labels):
        nonzero = np.flatnonzero(features)
        pairs = " ".join(f"{i + 1}:{float(features[i])!r}" for i in nonzero)
        stream.write(f"{float(label)!r} {pairs}".rstrip() + "\n")
