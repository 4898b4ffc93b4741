# End-to-end enhancement, evaluation and benchmark module

from .enhancer import (
    PQF_REFERENCES, NEIGHBOR_REFERENCES, DETECTOR_LABELS, GROUND_TRUTH_LABELS,
    Sequence_Enhancer, enhance_sequence,
)
from .report import SplitAverages, EnhancementReport, delta_psnr, split_averages, evaluate
from .benchmark import BenchmarkResult, machine_descriptor, benchmark_fps

__all__ = [
    'PQF_REFERENCES', 'NEIGHBOR_REFERENCES', 'DETECTOR_LABELS', 'GROUND_TRUTH_LABELS',
    'Sequence_Enhancer', 'enhance_sequence', 'SplitAverages', 'EnhancementReport',
    'delta_psnr', 'split_averages', 'evaluate', 'BenchmarkResult', 'machine_descriptor',
    'benchmark_fps',
]
