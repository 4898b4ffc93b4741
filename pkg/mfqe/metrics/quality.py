"""Per-frame quality metrics and quality curves."""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from skimage.metrics import structural_similarity

from ..errors import ValidationFailure
from ..validation import Input_Validator

logger = logging.getLogger(__name__)

PSNR = "PSNR"
SSIM = "SSIM"
METRIC_KINDS = (PSNR, SSIM)

# Identical frames have no finite PSNR
INFINITE_PSNR = math.inf

SSIM_SIGMA = 1.5
SSIM_WINDOW = 11


class MetricError(ValidationFailure):
    """Raised when a metric cannot be computed on the given input."""
    pass


@dataclass
class QualityCurve:
    """Per-frame quality of a test sequence against its raw source."""
    values: np.ndarray
    metric_kind: str = PSNR

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.metric_kind not in METRIC_KINDS:
            raise MetricError(f"Unknown metric kind: {self.metric_kind}")

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def finite_mean(self) -> float:
        """Mean over finite entries, inf when every entry is saturated."""
        finite = self.values[np.isfinite(self.values)]
        return float(finite.mean()) if finite.size else INFINITE_PSNR


def _luma(frame) -> np.ndarray:
    return np.asarray(getattr(frame, 'luma', frame), dtype=np.float64)


def mse(a, b) -> float:
    """Mean squared error between two frames or planes."""
    x, y = _luma(a), _luma(b)
    Input_Validator().require_same_shape(x, y)
    return float(np.mean((x - y) ** 2))


def psnr(a, b) -> float:
    """PSNR in dB of [0, 1] luma; ``math.inf`` for identical frames.

    Raises:
        AlignmentError: If the frames differ in size
    """
    error = mse(a, b)
    if error == 0.0:
        return INFINITE_PSNR
    return 10.0 * math.log10(1.0 / error)


def ssim(a, b) -> float:
    """Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5).

    K1 = 0.01 and K2 = 0.03 on a unit data range; the score is the mean over
    all window positions that fit entirely inside the frame.

    Raises:
        AlignmentError: If the frames differ in size
        MetricError: If either side is under 11 pixels
    """
    x, y = _luma(a), _luma(b)
    Input_Validator().require_same_shape(x, y)
    if min(x.shape) < SSIM_WINDOW:
        raise MetricError(f"SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {x.shape[1]}x{x.shape[0]}")

    return float(structural_similarity(
        x, y, data_range=1.0, gaussian_weights=True, sigma=SSIM_SIGMA,
        use_sample_covariance=False, K1=0.01, K2=0.03,
    ))


_METRICS = {PSNR: psnr, SSIM: ssim}


def quality_curve(raw, test, metric_kind: str = PSNR) -> QualityCurve:
    """Score every frame of ``test`` against the co-indexed raw frame.

    Raises:
        AlignmentError: If the sequences differ in length or size
        MetricError: On an unknown metric kind
    """
    if metric_kind not in _METRICS:
        raise MetricError(f"Unknown metric kind: {metric_kind}")
    Input_Validator().require_aligned(raw, test)

    metric = _METRICS[metric_kind]
    values: List[float] = [metric(r, t) for r, t in zip(raw.frames, test.frames)]
    return QualityCurve(values=np.array(values, dtype=np.float64), metric_kind=metric_kind)
