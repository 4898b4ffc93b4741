"""Quality fluctuation statistics (SD, PVD, PS) and inter-frame correlation."""

import logging
from dataclasses import dataclass
from typing import Any, List, Optional

import numpy as np

from .quality import MetricError, QualityCurve

logger = logging.getLogger(__name__)


@dataclass
class FluctuationStats:
    """SD and peak-valley difference of a curve, plus peak separation in frames."""
    sd: float
    pvd: float
    ps: Optional[float] = None
    peaks: int = 0


@dataclass
class CorrelationCurve:
    """Per-lag mean and SD of the Pearson correlation between frames."""
    lags: List[int]
    means: List[float]
    sds: List[float]
    skipped: int = 0


def local_peaks(values: np.ndarray) -> np.ndarray:
    """Indices strictly greater than both neighbours; plateaus never count."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 3:
        return np.array([], dtype=np.int64)
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    return np.flatnonzero(inner) + 1


def local_valleys(values: np.ndarray) -> np.ndarray:
    """Indices strictly smaller than both neighbours."""
    return local_peaks(-np.asarray(values, dtype=np.float64))


def peak_valley_difference(values: np.ndarray) -> tuple:
    """Mean of (peak - nearest valley) over all peaks that have a valley.

    Distance ties go to the subsequent valley.

    Returns:
        Tuple of (pvd, number of peaks paired)
    """
    v = np.asarray(values, dtype=np.float64)
    peaks = local_peaks(v)
    valleys = local_valleys(v)
    if peaks.size == 0 or valleys.size == 0:
        return 0.0, 0

    gaps = []
    for peak in peaks:
        distance = np.abs(valleys - peak)
        nearest = np.flatnonzero(distance == distance.min())
        valley = valleys[nearest[-1]]
        gaps.append(v[peak] - v[valley])
    return float(np.mean(gaps)), len(gaps)


def peak_separation(labels: Any) -> Optional[float]:
    """Mean count of non-PQF frames between adjacent PQFs; None under two PQFs."""
    values = np.asarray(getattr(labels, 'labels', labels), dtype=np.int64)
    positions = np.flatnonzero(values == 1)
    if positions.size < 2:
        return None
    return float(np.mean(np.diff(positions) - 1))


def fluctuation_stats(curve: QualityCurve, labels: Any = None) -> FluctuationStats:
    """Compute SD, PVD and (when labels are given) PS of a quality curve.

    Args:
        curve: Finite per-frame quality
        labels: Optional PqfAnnotation or 0/1 vector for PS

    Returns:
        FluctuationStats with population SD

    Raises:
        MetricError: If the curve is shorter than 3 or holds non-finite values
    """
    values = np.asarray(curve.values, dtype=np.float64)
    if values.size < 3:
        raise MetricError(f"Fluctuation statistics need at least 3 frames, got {values.size}")
    if not np.isfinite(values).all():
        raise MetricError("Fluctuation statistics need a finite curve; saturated frames present")

    sd = float(np.std(values))
    pvd, paired = peak_valley_difference(values)
    ps = peak_separation(labels) if labels is not None else None
    return FluctuationStats(sd=sd, pvd=pvd, ps=ps, peaks=paired)


def pearson(a: np.ndarray, b: np.ndarray) -> Optional[float]:
    """Pearson correlation of two planes, None when either is constant."""
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    dx = x - x.mean()
    dy = y - y.mean()
    denominator = np.sqrt(np.dot(dx, dx) * np.dot(dy, dy))
    if denominator == 0.0:
        return None
    return float(np.dot(dx, dy) / denominator)


def cc_curve(seq, max_lag: int = 10) -> CorrelationCurve:
    """Correlation between frame n and n+k for every lag k in 1..max_lag.

    Pairs involving a constant frame are skipped and counted.

    Raises:
        MetricError: If the sequence has no more than ``max_lag`` frames
    """
    if max_lag < 1:
        raise MetricError("max_lag must be at least 1")
    if len(seq) <= max_lag:
        raise MetricError(f"Correlation up to lag {max_lag} needs more than {max_lag} frames, got {len(seq)}")

    lags, means, sds = [], [], []
    skipped = 0
    for lag in range(1, max_lag + 1):
        values = []
        for n in range(len(seq) - lag):
            cc = pearson(seq.frames[n].luma, seq.frames[n + lag].luma)
            if cc is None:
                skipped += 1
                continue
            values.append(cc)
        lags.append(lag)
        if values:
            means.append(float(np.mean(values)))
            sds.append(float(np.std(values)))
        else:
            means.append(float('nan'))
            sds.append(float('nan'))

    if skipped:
        logger.warning("Skipped %d frame pairs with constant luma in correlation analysis", skipped)
    return CorrelationCurve(lags=lags, means=means, sds=sds, skipped=skipped)
