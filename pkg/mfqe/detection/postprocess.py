"""
Turn per-frame PQF probabilities into labels.

Strategy I removes consecutive PQFs, keeping the most probable frame of each
run of 1s. Strategy II breaks runs of more than D non-PQFs by promoting the
most probable frame of the run's strict interior, repeated until no run is
left to break. Runs touching either end of the sequence count as bounded by
a virtual PQF beyond the boundary.
"""

import logging
from typing import Iterator, Tuple

import numpy as np

from .annotation import DetectorError

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
DEFAULT_MAX_SEPARATION = 3


def runs_of(labels: np.ndarray, value: int) -> Iterator[Tuple[int, int]]:
    """Yield (start, end) inclusive bounds of maximal runs equal to ``value``."""
    start = None
    for index, label in enumerate(labels):
        if label == value and start is None:
            start = index
        elif label != value and start is not None:
            yield start, index - 1
            start = None
    if start is not None:
        yield start, len(labels) - 1


def remove_consecutive_pqfs(labels: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Strategy I: keep only the highest-probability frame of every run of 1s."""
    result = labels.copy()
    for start, end in list(runs_of(labels, 1)):
        if end == start:
            continue
        keep = start + int(np.argmax(probs[start:end + 1]))
        result[start:end + 1] = 0
        result[keep] = 1
    return result


def break_long_gaps(labels: np.ndarray, probs: np.ndarray, max_separation: int) -> np.ndarray:
    """Strategy II: promote interior frames until no zero run exceeds ``max_separation``.

    A run of two zeros has no strict interior and is left as is, so with a
    separation limit of 1 such runs survive; promoting either frame would put
    two PQFs side by side.
    """
    result = labels.copy()
    while True:
        promoted = False
        for start, end in runs_of(result, 0):
            if end - start + 1 <= max_separation or end - start < 2:
                continue
            candidate = start + 1 + int(np.argmax(probs[start + 1:end]))
            result[candidate] = 1
            promoted = True
            break
        if not promoted:
            return result


def postprocess(probs, threshold: float = DEFAULT_THRESHOLD,
                max_separation: int = DEFAULT_MAX_SEPARATION) -> np.ndarray:
    """
    Threshold probabilities, then apply Strategy I and Strategy II.

    Ties in both argmax steps go to the earliest frame.

    Args:
        probs: Per-frame PQF probabilities in [0, 1]
        threshold: Probability at or above which a frame starts as a PQF
        max_separation: D, the largest allowed run of non-PQFs

    Returns:
        0/1 label vector

    Raises:
        DetectorError: On probabilities outside [0, 1] or D < 1
    """
    values = np.asarray(probs, dtype=np.float64)
    if values.ndim != 1:
        raise DetectorError("Probabilities must form a 1-D vector")
    if values.size and (not np.isfinite(values).all() or values.min() < 0.0 or values.max() > 1.0):
        raise DetectorError("Probabilities must lie in [0, 1]")
    if max_separation < 1:
        raise DetectorError(f"Maximal PQF separation must be at least 1, got {max_separation}")

    labels = (values >= threshold).astype(np.int64)
    labels = remove_consecutive_pqfs(labels, values)
    labels = break_long_gaps(labels, values, max_separation)
    return labels
