"""PQF annotations, ground-truth labeling and detector scoring."""

import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import ValidationFailure

logger = logging.getLogger(__name__)


class DetectorError(ValidationFailure):
    """Raised on invalid detector inputs, annotations or windows."""
    pass


@dataclass
class PqfAnnotation:
    """Per-frame PQF probability and binary label."""
    probs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.probs.shape != self.labels.shape:
            raise DetectorError(
                f"Annotation has {self.probs.size} probabilities and {self.labels.size} labels"
            )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def pqf_indices(self) -> List[int]:
        return np.flatnonzero(self.labels == 1).tolist()

    @classmethod
    def from_labels(cls, labels) -> "PqfAnnotation":
        """Annotation whose probabilities are the labels themselves."""
        values = np.asarray(labels, dtype=np.int64)
        return cls(probs=values.astype(np.float64), labels=values)


def ground_truth_labels(curve) -> np.ndarray:
    """Label frame n a PQF iff its quality beats both neighbours strictly.

    Endpoints are never PQFs.

    Args:
        curve: QualityCurve or 1-D array of per-frame quality

    Raises:
        DetectorError: If the curve is shorter than 3 or not finite
    """
    values = np.asarray(getattr(curve, 'values', curve), dtype=np.float64)
    if values.ndim != 1 or values.size < 3:
        raise DetectorError(f"Ground-truth labeling needs a curve of at least 3 frames, got {values.size}")
    if not np.isfinite(values).all():
        raise DetectorError("Ground-truth labeling needs a finite curve")

    labels = np.zeros(values.size, dtype=np.int64)
    labels[1:-1] = (values[1:-1] > values[:-2]) & (values[1:-1] > values[2:])
    return labels


@dataclass
class DetectorMetrics:
    """Precision, recall and F1 over the PQF class; None marks an undefined value."""
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    notes: List[str] = field(default_factory=list)


def detector_metrics(pred, gt) -> DetectorMetrics:
    """
    Score predicted PQF labels against ground truth.

    Zero denominators leave the value as None with a note explaining why.

    Raises:
        DetectorError: If the label vectors differ in length
    """
    predicted = np.asarray(getattr(pred, 'labels', pred), dtype=np.int64)
    truth = np.asarray(getattr(gt, 'labels', gt), dtype=np.int64)
    if predicted.shape != truth.shape:
        raise DetectorError(f"Label vectors differ in length: {predicted.size} vs {truth.size}")

    tp = int(np.sum((predicted == 1) & (truth == 1)))
    fp = int(np.sum((predicted == 1) & (truth == 0)))
    fn = int(np.sum((predicted == 0) & (truth == 1)))
    notes = []

    if tp + fp:
        precision = tp / (tp + fp)
    else:
        precision = None
        notes.append("precision undefined: no frames predicted as PQF")

    if tp + fn:
        recall = tp / (tp + fn)
    else:
        recall = None
        notes.append("recall undefined: ground truth has no PQF")

    if 2 * tp + fp + fn:
        f1 = 2 * tp / (2 * tp + fp + fn)
    else:
        f1 = None
        notes.append("f1 undefined: no PQF predicted or present")

    return DetectorMetrics(precision=precision, recall=recall, f1=f1, true_positives=tp,
                           false_positives=fp, false_negatives=fn, notes=notes)


def write_annotation(annotation: PqfAnnotation, path: str) -> None:
    """Write ``frame_index,prob,label`` lines with a header."""
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write("frame_index,prob,label\n")
        for index, (prob, label) in enumerate(zip(annotation.probs, annotation.labels)):
            handle.write(f"{index},{prob:.6f},{int(label)}\n")


def load_annotation(path: str) -> PqfAnnotation:
    """Read an annotation written by ``write_annotation``.

    Raises:
        DetectorError: On missing files, bad lines or out-of-order indices
    """
    if not os.path.exists(path):
        raise DetectorError(f"Annotation file not found: {path}")

    probs, labels = [], []
    with open(path, 'r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or (line_number == 1 and text.startswith('frame_index')):
                continue
            parts = text.split(',')
            try:
                index, prob, label = int(parts[0]), float(parts[1]), int(parts[2])
            except (IndexError, ValueError):
                raise DetectorError(f"{path}:{line_number}: expected 'frame_index,prob,label', got {text!r}")
            if index != len(labels):
                raise DetectorError(f"{path}:{line_number}: frame index {index} out of order")
            if label not in (0, 1) or not 0.0 <= prob <= 1.0:
                raise DetectorError(f"{path}:{line_number}: invalid probability or label")
            probs.append(prob)
            labels.append(label)

    return PqfAnnotation(probs=np.array(probs), labels=np.array(labels))
