"""Throughput measurement of the enhancement pipeline."""

import logging
import platform
import statistics
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch

from ..config import PipelineConfig
from ..detection import PqfAnnotation
from ..enhancement import REFERENCE_PARAMETER_COUNT, module_parameter_count, operation_count
from ..video import Sequence
from .enhancer import Sequence_Enhancer

logger = logging.getLogger(__name__)

BENCHMARK_PQF_PERIOD = 4


@dataclass
class BenchmarkResult:
    """Median throughput plus the model's size and cost."""
    fps: float
    width: int
    height: int
    frames: int
    runs: List[float] = field(default_factory=list)
    parameters: int = 0
    reference_parameters: int = REFERENCE_PARAMETER_COUNT
    operations: Dict[str, int] = field(default_factory=dict)
    machine: Dict[str, str] = field(default_factory=dict)


def machine_descriptor(device: str = 'cpu') -> Dict[str, str]:
    """Describe the host the benchmark ran on."""
    descriptor = {
        'platform': platform.platform(),
        'processor': platform.processor() or platform.machine(),
        'python': platform.python_version(),
        'torch': torch.__version__,
        'threads': str(torch.get_num_threads()),
        'device': device,
    }
    if device.startswith('cuda') and torch.cuda.is_available():
        descriptor['gpu'] = torch.cuda.get_device_name(torch.device(device))
    return descriptor


def _synthetic_input(width: int, height: int, frames: int, seed: int) -> Tuple[Sequence, PqfAnnotation]:
    rng = np.random.default_rng(seed)
    stack = rng.random((frames, height, width))
    labels = np.array([1 if n % BENCHMARK_PQF_PERIOD == 1 else 0 for n in range(frames)])
    return Sequence.from_luma(stack), PqfAnnotation.from_labels(labels)


def benchmark_fps(enhancer: Sequence_Enhancer, resolution: Tuple[int, int],
                  repeats: Optional[int] = None, warmup: Optional[int] = None,
                  frames: Optional[int] = None, seed: int = 0) -> BenchmarkResult:
    """
    Time sequence enhancement at one resolution.

    Warm-up runs are discarded; the reported value is the median over the
    timed repeats.

    Args:
        enhancer: Enhancer holding the loaded models
        resolution: (width, height) of the synthetic input
        repeats: Timed runs (defaults to the pipeline config)
        warmup: Untimed runs before timing (defaults to the pipeline config)
        frames: Frames per run (defaults to the pipeline config)
        seed: Seed of the synthetic input

    Returns:
        BenchmarkResult with fps, per-run fps, parameter and operation counts
    """
    config: PipelineConfig = enhancer.config
    repeats = repeats if repeats is not None else config.benchmark_repeats
    warmup = warmup if warmup is not None else config.benchmark_warmup
    frames = frames if frames is not None else config.benchmark_frames
    width, height = resolution

    comp, annotation = _synthetic_input(width, height, frames, seed)
    for _ in range(warmup):
        enhancer.enhance(comp, annotation)

    runs = []
    for index in range(repeats):
        started = time.perf_counter()
        enhancer.enhance(comp, annotation)
        if enhancer.device.type == 'cuda':
            torch.cuda.synchronize(enhancer.device)
        elapsed = time.perf_counter() - started
        runs.append(frames / elapsed)
        logger.debug("Benchmark run %d: %.2f fps", index + 1, runs[-1])

    model = enhancer.non_pqf_model
    result = BenchmarkResult(
        fps=float(statistics.median(runs)),
        width=width,
        height=height,
        frames=frames,
        runs=runs,
        parameters=module_parameter_count(model),
        operations=operation_count(model.mc.config, model.qe.config),
        machine=machine_descriptor(config.device),
    )
    logger.info("Benchmark %dx%d: %.2f fps (median of %d)", width, height, result.fps, repeats)
    return result
