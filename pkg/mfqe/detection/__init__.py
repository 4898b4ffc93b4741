# PQF detection module

from .annotation import (
    DetectorError, PqfAnnotation, DetectorMetrics, ground_truth_labels, detector_metrics,
    write_annotation, load_annotation,
)
from .postprocess import (
    DEFAULT_THRESHOLD, DEFAULT_MAX_SEPARATION, runs_of, remove_consecutive_pqfs,
    break_long_gaps, postprocess,
)
from .detector import (
    PqfDetectorNet, PqfDetector, Detector_Trainer, make_windows, training_windows,
    detector_forward, sequence_probabilities, detect_from_features, detect, train_detector,
    save_detector, load_detector,
)

__all__ = [
    'DetectorError', 'PqfAnnotation', 'DetectorMetrics', 'ground_truth_labels',
    'detector_metrics', 'write_annotation', 'load_annotation', 'DEFAULT_THRESHOLD',
    'DEFAULT_MAX_SEPARATION', 'runs_of', 'remove_consecutive_pqfs', 'break_long_gaps',
    'postprocess', 'PqfDetectorNet', 'PqfDetector', 'Detector_Trainer', 'make_windows',
    'training_windows', 'detector_forward', 'sequence_probabilities', 'detect_from_features',
    'detect', 'train_detector', 'save_detector', 'load_detector',
]
