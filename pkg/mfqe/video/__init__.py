# Video ingest, emit and training-sample module

from .io import (
    LUMA_LEVELS, Frame, Sequence, FrameMetadata, VideoFormatError, MetadataError, VideoIOError,
    read_yuv420, write_yuv420, load_metadata, write_metadata, quantize_luma, frame_bytes,
)
from .samples import (
    TrainingSample, extract_training_samples, nearest_pqfs, neighbor_references,
    split_by_target,
)

__all__ = [
    'LUMA_LEVELS', 'Frame', 'Sequence', 'FrameMetadata', 'VideoFormatError', 'MetadataError', 'VideoIOError',
    'read_yuv420', 'write_yuv420', 'load_metadata', 'write_metadata', 'quantize_luma',
    'frame_bytes', 'TrainingSample', 'extract_training_samples', 'nearest_pqfs',
    'neighbor_references', 'split_by_target',
]
