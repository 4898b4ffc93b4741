"""Rate-distortion points and Bjøntegaard deltas."""

import logging
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence as SequenceType, Tuple

import numpy as np

from ..validation import Input_Validator
from .quality import MetricError

logger = logging.getLogger(__name__)

FIT_DEGREE = 3


@dataclass
class RdPoint:
    """One encode of a sequence: rate (kbps or bits) and quality (dB)."""
    rate: float
    quality: float
    qp: Optional[int] = None


def _check_curve(points: SequenceType[RdPoint], name: str) -> None:
    is_valid, error = Input_Validator().validate_rd_curve(points)
    if not is_valid:
        raise MetricError(f"{name} curve: {error}")


def _fit(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.polyfit(x, y, FIT_DEGREE)


def _average_over(coefficients: np.ndarray, low: float, high: float) -> float:
    integral = np.polyint(coefficients)
    return float((np.polyval(integral, high) - np.polyval(integral, low)) / (high - low))


def _overlap(first: np.ndarray, second: np.ndarray, what: str) -> Tuple[float, float]:
    low = max(first.min(), second.min())
    high = min(first.max(), second.max())
    if not high > low:
        raise MetricError(f"RD curves have no {what} overlap")
    return float(low), float(high)


def bd_rate(anchor: SequenceType[RdPoint], test: SequenceType[RdPoint]) -> float:
    """Bjøntegaard delta-rate in percent; negative means the test saves bits.

    log10(rate) is fitted as a cubic in quality for each curve and the
    difference of the fits is averaged over the shared quality interval.

    Raises:
        MetricError: With fewer than four points or no quality overlap
    """
    _check_curve(anchor, "Anchor")
    _check_curve(test, "Test")

    anchor_q = np.array([p.quality for p in anchor], dtype=np.float64)
    test_q = np.array([p.quality for p in test], dtype=np.float64)
    anchor_r = np.log10([p.rate for p in anchor])
    test_r = np.log10([p.rate for p in test])

    low, high = _overlap(anchor_q, test_q, "quality")
    delta = (_average_over(_fit(test_q, test_r), low, high)
             - _average_over(_fit(anchor_q, anchor_r), low, high))
    return float(100.0 * (10.0 ** delta - 1.0))


def bd_psnr(anchor: SequenceType[RdPoint], test: SequenceType[RdPoint]) -> float:
    """Bjøntegaard delta-quality in dB at equal rate; positive means the test is better.

    Raises:
        MetricError: With fewer than four points or no rate overlap
    """
    _check_curve(anchor, "Anchor")
    _check_curve(test, "Test")

    anchor_q = np.array([p.quality for p in anchor], dtype=np.float64)
    test_q = np.array([p.quality for p in test], dtype=np.float64)
    anchor_r = np.log10([p.rate for p in anchor])
    test_r = np.log10([p.rate for p in test])

    low, high = _overlap(anchor_r, test_r, "rate")
    return (_average_over(_fit(test_r, test_q), low, high)
            - _average_over(_fit(anchor_r, anchor_q), low, high))


def load_rd_points(path: str) -> List[RdPoint]:
    """Read ``qp,rate,psnr`` lines; a non-numeric first line is a header.

    Raises:
        MetricError: On missing files or malformed lines (with line number)
    """
    if not os.path.exists(path):
        raise MetricError(f"RD point file not found: {path}")

    points: List[RdPoint] = []
    with open(path, 'r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith('#'):
                continue
            parts = [p.strip() for p in text.split(',')]
            if len(parts) != 3:
                raise MetricError(f"{path}:{line_number}: expected 'qp,rate,psnr', got {text!r}")
            try:
                qp, rate, quality = int(parts[0]), float(parts[1]), float(parts[2])
            except ValueError:
                if line_number == 1 and not points:
                    continue
                raise MetricError(f"{path}:{line_number}: non-numeric field in {text!r}")
            points.append(RdPoint(rate=rate, quality=quality, qp=qp))

    return points


def write_rd_points(points: SequenceType[RdPoint], path: str) -> None:
    """Write ``qp,rate,psnr`` lines with a header."""
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write("qp,rate,psnr\n")
        for point in points:
            qp = point.qp if point.qp is not None else 0
            handle.write(f"{qp},{point.rate!r},{point.quality!r}\n")
