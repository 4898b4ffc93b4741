"""
Input validation for sequences, labels and rate-distortion curves.

The checks return ``(is_valid, error_message)`` tuples so callers can decide
whether to report or raise; the ``require_*`` helpers raise directly.
"""

import math
from typing import Any, Optional, Sequence as SequenceType, Tuple

import numpy as np

from ..errors import ValidationFailure


class AlignmentError(ValidationFailure):
    """Raised when sequences, frames or label vectors do not line up."""
    pass


class Input_Validator:
    """
    Validates pipeline inputs before any computation runs.

    Provides methods to:
    - Check that two sequences share frame count and dimensions
    - Check label vectors against a sequence length
    - Check rate-distortion curves before Bjøntegaard fitting
    """

    # Frames need both neighbours for the PQF definition
    MIN_SEQUENCE_FRAMES = 3

    # Cubic fits need at least four points
    MIN_RD_POINTS = 4

    def validate_sequence(self, seq: Any, min_frames: int = 1) -> Tuple[bool, Optional[str]]:
        """
        Validate a sequence's frame count and uniform geometry.

        Args:
            seq: Sequence to check
            min_frames: Minimum number of frames required

        Returns:
            Tuple of (is_valid, error_message)
        """
        if seq is None or len(seq) == 0:
            return False, "Sequence contains no frames"

        if len(seq) < min_frames:
            return False, f"Sequence has {len(seq)} frames, at least {min_frames} required"

        shape = seq.frames[0].luma.shape
        for index, frame in enumerate(seq.frames):
            if frame.luma.shape != shape:
                return False, (
                    f"Frame {index} is {frame.width}x{frame.height}, "
                    f"expected {shape[1]}x{shape[0]}"
                )

        return True, None

    def validate_aligned(self, first: Any, second: Any) -> Tuple[bool, Optional[str]]:
        """
        Validate that two sequences have the same N, width and height.

        Args:
            first: Reference sequence
            second: Sequence compared against the reference

        Returns:
            Tuple of (is_valid, error_message)
        """
        if len(first) != len(second):
            return False, f"Frame count mismatch: {len(first)} vs {len(second)}"

        if len(first) and (first.width, first.height) != (second.width, second.height):
            return False, (
                f"Dimension mismatch: {first.width}x{first.height} "
                f"vs {second.width}x{second.height}"
            )

        return True, None

    def validate_labels(self, labels: SequenceType[int], length: int) -> Tuple[bool, Optional[str]]:
        """
        Validate a binary PQF label vector.

        Args:
            labels: Per-frame labels
            length: Expected number of frames

        Returns:
            Tuple of (is_valid, error_message)
        """
        values = np.asarray(labels)
        if values.ndim != 1 or values.shape[0] != length:
            return False, f"Label vector has length {values.size}, expected {length}"

        if not np.isin(values, (0, 1)).all():
            return False, "Labels must be 0 or 1"

        return True, None

    def validate_rd_curve(self, points: SequenceType[Any]) -> Tuple[bool, Optional[str]]:
        """
        Validate a rate-distortion curve for Bjøntegaard fitting.

        Args:
            points: RD points with ``rate`` and ``quality`` attributes

        Returns:
            Tuple of (is_valid, error_message)
        """
        if len(points) < self.MIN_RD_POINTS:
            return False, (
                f"RD curve has {len(points)} points, at least {self.MIN_RD_POINTS} required"
            )

        for point in points:
            if not point.rate > 0:
                return False, f"RD point rate must be positive, got {point.rate}"
            if not math.isfinite(point.quality):
                return False, f"RD point quality must be finite, got {point.quality}"

        ordered = sorted(points, key=lambda p: p.rate)
        qualities = [p.quality for p in ordered]
        if any(b <= a for a, b in zip(qualities, qualities[1:])):
            return False, "RD curve quality must increase strictly with rate"

        return True, None

    def require_aligned(self, first: Any, second: Any) -> None:
        """Raise AlignmentError unless the sequences line up."""
        is_valid, error = self.validate_aligned(first, second)
        if not is_valid:
            raise AlignmentError(error)

    def require_labels(self, labels: SequenceType[int], length: int) -> None:
        """Raise AlignmentError unless the labels fit the sequence."""
        is_valid, error = self.validate_labels(labels, length)
        if not is_valid:
            raise AlignmentError(error)

    def require_same_shape(self, first: np.ndarray, second: np.ndarray, what: str = "Frames") -> None:
        """Raise AlignmentError when two planes differ in shape."""
        if np.shape(first) != np.shape(second):
            raise AlignmentError(
                f"{what} differ in shape: {np.shape(first)} vs {np.shape(second)}"
            )
