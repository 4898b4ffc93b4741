"""Planar YUV 4:2:0 ingest/emit and the per-frame metadata sidecar."""

import logging
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..errors import MfqeError, ValidationFailure

logger = logging.getLogger(__name__)

# 8-bit source material only
LUMA_LEVELS = 255.0
NEUTRAL_CHROMA = 128
MAX_QP = 51


class VideoFormatError(ValidationFailure):
    """Raised when a raw video file or its geometry is malformed."""
    pass


class MetadataError(ValidationFailure):
    """Raised when the metadata sidecar cannot be parsed or validated."""
    pass


class VideoIOError(MfqeError):
    """Raised when a video file cannot be written."""
    pass


@dataclass
class Frame:
    """One luma plane normalized to [0, 1]."""
    luma: np.ndarray

    @property
    def width(self) -> int:
        return int(self.luma.shape[1])

    @property
    def height(self) -> int:
        return int(self.luma.shape[0])


@dataclass
class Sequence:
    """Ordered frames of one video with optional untouched chroma planes."""
    frames: List[Frame]
    frame_rate: float = 30.0
    chroma: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, index: int) -> Frame:
        return self.frames[index]

    @property
    def width(self) -> int:
        return self.frames[0].width if self.frames else 0

    @property
    def height(self) -> int:
        return self.frames[0].height if self.frames else 0

    def luma_stack(self) -> np.ndarray:
        """Return all luma planes as an (N, H, W) float64 array."""
        return np.stack([frame.luma for frame in self.frames])

    @classmethod
    def from_luma(cls, stack: np.ndarray, frame_rate: float = 30.0,
                  chroma: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None) -> "Sequence":
        """Build a sequence from an (N, H, W) luma array."""
        stack = np.asarray(stack, dtype=np.float64)
        if stack.ndim != 3:
            raise VideoFormatError(f"Luma stack must be 3-D (N, H, W), got shape {stack.shape}")
        return cls(frames=[Frame(luma=plane.copy()) for plane in stack],
                   frame_rate=frame_rate, chroma=chroma)

    def subsequence(self, start: int, stop: int) -> "Sequence":
        """Return frames [start, stop) with their chroma."""
        chroma = self.chroma[start:stop] if self.chroma is not None else None
        return Sequence(frames=list(self.frames[start:stop]), frame_rate=self.frame_rate, chroma=chroma)

    def with_luma(self, stack: np.ndarray) -> "Sequence":
        """Return a copy carrying new luma planes and this sequence's chroma."""
        return Sequence.from_luma(stack, frame_rate=self.frame_rate, chroma=self.chroma)


@dataclass
class FrameMetadata:
    """Compressed-domain values of one frame, read from the encoder log."""
    bits: int
    qp: int

    def __post_init__(self):
        if self.bits < 0:
            raise MetadataError(f"bits must be non-negative, got {self.bits}")
        if not 0 <= self.qp <= MAX_QP:
            raise MetadataError(f"qp must lie in [0, {MAX_QP}], got {self.qp}")


def frame_bytes(width: int, height: int) -> int:
    """Number of bytes of one 8-bit 4:2:0 frame."""
    return width * height + 2 * (width // 2) * (height // 2)


def _check_dimensions(width: int, height: int) -> None:
    if width <= 0 or height <= 0:
        raise VideoFormatError(f"Frame dimensions must be positive, got {width}x{height}")
    if width % 2 or height % 2:
        raise VideoFormatError(f"4:2:0 frames need even dimensions, got {width}x{height}")


def read_yuv420(path: str, width: int, height: int, frame_rate: float = 30.0) -> Sequence:
    """Read an 8-bit planar YUV 4:2:0 file.

    Args:
        path: Raw video file (no header)
        width: Frame width in pixels
        height: Frame height in pixels
        frame_rate: Stored as metadata only

    Returns:
        Sequence with luma normalized to [0, 1] and chroma kept verbatim

    Raises:
        VideoFormatError: On bad dimensions or a partial trailing frame
    """
    _check_dimensions(width, height)
    size = frame_bytes(width, height)

    if not os.path.exists(path):
        raise VideoFormatError(f"Video file not found: {path}")

    data = np.fromfile(path, dtype=np.uint8)
    if data.size % size:
        raise VideoFormatError(
            f"{path} holds {data.size} bytes, not a whole number of "
            f"{width}x{height} 4:2:0 frames ({size} bytes each)"
        )
    if data.size == 0:
        raise VideoFormatError(f"{path} contains no frames")

    count = data.size // size
    planes = data.reshape(count, size)
    luma_size = width * height
    chroma_size = (width // 2) * (height // 2)
    chroma_shape = (height // 2, width // 2)

    frames = []
    chroma = []
    for row in planes:
        y = row[:luma_size].reshape(height, width)
        u = row[luma_size:luma_size + chroma_size].reshape(chroma_shape).copy()
        v = row[luma_size + chroma_size:].reshape(chroma_shape).copy()
        frames.append(Frame(luma=y.astype(np.float64) / LUMA_LEVELS))
        chroma.append((u, v))

    logger.debug("Read %d frames of %dx%d from %s", count, width, height, path)
    return Sequence(frames=frames, frame_rate=frame_rate, chroma=chroma)


def quantize_luma(luma: np.ndarray) -> np.ndarray:
    """Map [0, 1] luma to bytes: round half up, then clamp to [0, 255]."""
    levels = np.floor(np.asarray(luma, dtype=np.float64) * LUMA_LEVELS + 0.5)
    return np.clip(levels, 0, LUMA_LEVELS).astype(np.uint8)


def write_yuv420(seq: Sequence, path: str) -> None:
    """Write a sequence as 8-bit planar YUV 4:2:0.

    Frames without chroma get neutral (128) chroma planes.

    Raises:
        VideoFormatError: If the sequence is empty or has odd dimensions
        VideoIOError: If the path cannot be written
    """
    if len(seq) == 0:
        raise VideoFormatError("Cannot write an empty sequence")
    _check_dimensions(seq.width, seq.height)

    chroma_shape = (seq.height // 2, seq.width // 2)
    neutral = np.full(chroma_shape, NEUTRAL_CHROMA, dtype=np.uint8)

    try:
        with open(path, 'wb') as handle:
            for index, frame in enumerate(seq.frames):
                handle.write(quantize_luma(frame.luma).tobytes())
                if seq.chroma is not None:
                    u, v = seq.chroma[index]
                else:
                    u, v = neutral, neutral
                handle.write(np.ascontiguousarray(u, dtype=np.uint8).tobytes())
                handle.write(np.ascontiguousarray(v, dtype=np.uint8).tobytes())
    except OSError as e:
        raise VideoIOError(f"Cannot write video to {path}: {e}")

    logger.debug("Wrote %d frames to %s", len(seq), path)


def load_metadata(path: str, expected_count: Optional[int] = None) -> List[FrameMetadata]:
    """Load the ``frame_index,bits,qp`` sidecar.

    A non-numeric first line is treated as a header. Blank lines are skipped.

    Args:
        path: Sidecar file
        expected_count: Frame count the list must match, if known

    Returns:
        One FrameMetadata per frame, in frame order

    Raises:
        MetadataError: On parse errors (with line number), invalid values,
            out-of-order indices or a count mismatch
    """
    if not os.path.exists(path):
        raise MetadataError(f"Metadata file not found: {path}")

    with open(path, 'r', encoding='utf-8') as handle:
        lines = handle.read().splitlines()

    records: List[FrameMetadata] = []
    for line_number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        parts = [p.strip() for p in text.split(',')]
        if line_number == 1 and not parts[0].lstrip('-').isdigit():
            continue
        if len(parts) != 3:
            raise MetadataError(f"{path}:{line_number}: expected 'frame_index,bits,qp', got {text!r}")
        try:
            index, bits, qp = (int(p) for p in parts)
        except ValueError:
            raise MetadataError(f"{path}:{line_number}: non-integer field in {text!r}")
        if index != len(records):
            raise MetadataError(
                f"{path}:{line_number}: frame index {index} out of order, expected {len(records)}"
            )
        try:
            records.append(FrameMetadata(bits=bits, qp=qp))
        except MetadataError as e:
            raise MetadataError(f"{path}:{line_number}: {e}")

    if expected_count is not None and len(records) != expected_count:
        raise MetadataError(
            f"{path} describes {len(records)} frames, expected {expected_count}"
        )

    return records


def write_metadata(meta: List[FrameMetadata], path: str) -> None:
    """Write the ``frame_index,bits,qp`` sidecar with a header line."""
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write("frame_index,bits,qp\n")
        for index, record in enumerate(meta):
            handle.write(f"{index},{record.bits},{record.qp}\n")
