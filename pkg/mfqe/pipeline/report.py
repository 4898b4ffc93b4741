"""Evaluation of an enhanced sequence against its raw source."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np

from ..detection import DetectorMetrics, PqfAnnotation, detector_metrics
from ..metrics import (
    PSNR, SSIM, FluctuationStats, MetricError, QualityCurve, fluctuation_stats, quality_curve,
)
from ..validation import Input_Validator

logger = logging.getLogger(__name__)


@dataclass
class SplitAverages:
    """Mean per-frame deltas over all frames, PQFs and non-PQFs (None if the group is empty)."""
    overall: Optional[float]
    pqf: Optional[float]
    non_pqf: Optional[float]


@dataclass
class EnhancementReport:
    """Per-frame and summary quality changes of one enhanced sequence."""
    delta_psnr: np.ndarray
    delta_ssim: np.ndarray
    psnr_before: np.ndarray
    psnr_after: np.ndarray
    labels: np.ndarray
    psnr_averages: SplitAverages
    ssim_averages: SplitAverages
    fluctuation_before: Optional[FluctuationStats] = None
    fluctuation_after: Optional[FluctuationStats] = None
    saturated_frames: int = 0
    fps: Optional[float] = None
    detector: Optional[DetectorMetrics] = None
    notes: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.delta_psnr.shape[0])


def delta_psnr(before: np.ndarray, after: np.ndarray) -> np.ndarray:
    """Per-frame PSNR gain; two saturated frames count as no change."""
    before = np.asarray(before, dtype=np.float64)
    after = np.asarray(after, dtype=np.float64)
    both = np.isinf(before) & np.isinf(after) & (np.sign(before) == np.sign(after))
    with np.errstate(invalid='ignore'):
        delta = after - before
    delta[both] = 0.0
    return delta


def _group_mean(values: np.ndarray) -> Optional[float]:
    # Mean over finite entries; an all-saturated group reports the sentinel
    if values.size == 0:
        return None
    finite = values[np.isfinite(values)]
    if finite.size:
        return float(finite.mean())
    return math.inf if np.all(values > 0) else -math.inf


def split_averages(deltas: np.ndarray, labels: np.ndarray) -> SplitAverages:
    """Average deltas overall and per PQF / non-PQF group."""
    return SplitAverages(
        overall=_group_mean(deltas),
        pqf=_group_mean(deltas[labels == 1]),
        non_pqf=_group_mean(deltas[labels == 0]),
    )


def _fluctuation(curve: QualityCurve, labels: np.ndarray, when: str, notes: List[str]) -> Optional[FluctuationStats]:
    try:
        return fluctuation_stats(curve, labels)
    except MetricError as e:
        notes.append(f"fluctuation {when} enhancement unavailable: {e}")
        return None


def evaluate(raw, comp, enhanced, annotation: PqfAnnotation, gt_labels: Any = None,
             fps: Optional[float] = None) -> EnhancementReport:
    """
    Compare an enhanced sequence and its compressed input against the raw source.

    Args:
        raw: Raw sequence
        comp: Compressed sequence
        enhanced: Enhanced sequence
        annotation: PQF labels used to split the averages
        gt_labels: Optional ground-truth labels for detector scoring
        fps: Optional measured throughput to carry in the report

    Returns:
        EnhancementReport with per-frame arrays and their summaries

    Raises:
        AlignmentError: If the three sequences (or the labels) do not line up
    """
    validator = Input_Validator()
    validator.require_aligned(raw, comp)
    validator.require_aligned(raw, enhanced)
    labels = np.asarray(getattr(annotation, 'labels', annotation), dtype=np.int64)
    validator.require_labels(labels, len(raw))

    psnr_before = quality_curve(raw, comp, PSNR)
    psnr_after = quality_curve(raw, enhanced, PSNR)
    ssim_before = quality_curve(raw, comp, SSIM)
    ssim_after = quality_curve(raw, enhanced, SSIM)

    d_psnr = delta_psnr(psnr_before.values, psnr_after.values)
    d_ssim = ssim_after.values - ssim_before.values
    saturated = int(np.sum(np.isinf(psnr_after.values)))

    notes: List[str] = []
    if saturated:
        notes.append(f"{saturated} enhanced frame(s) identical to raw (PSNR saturated)")

    detector = None
    if gt_labels is not None:
        detector = detector_metrics(labels, gt_labels)

    report = EnhancementReport(
        delta_psnr=d_psnr,
        delta_ssim=d_ssim,
        psnr_before=psnr_before.values,
        psnr_after=psnr_after.values,
        labels=labels,
        psnr_averages=split_averages(d_psnr, labels),
        ssim_averages=split_averages(d_ssim, labels),
        fluctuation_before=_fluctuation(psnr_before, labels, 'before', notes),
        fluctuation_after=_fluctuation(psnr_after, labels, 'after', notes),
        saturated_frames=saturated,
        fps=fps,
        detector=detector,
        notes=notes,
    )
    logger.info("Mean delta PSNR %s dB over %d frames", report.psnr_averages.overall, len(report))
    return report
