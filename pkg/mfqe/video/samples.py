"""Reference pairing and patch segmentation of aligned raw/compressed sequences."""

import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence as SequenceType, Tuple

import numpy as np

from ..validation import Input_Validator
from .io import Sequence, VideoFormatError

logger = logging.getLogger(__name__)

MIN_PATCH_FRAME = 64


@dataclass
class TrainingSample:
    """Six co-located patches plus where they were cut from."""
    comp_np: np.ndarray
    comp_p1: np.ndarray
    comp_p2: np.ndarray
    raw_np: np.ndarray
    raw_p1: np.ndarray
    raw_p2: np.ndarray
    frame_index: int
    p1_index: int
    p2_index: int
    y: int
    x: int
    target_is_pqf: bool = False

    def patches(self) -> Tuple[np.ndarray, ...]:
        return (self.comp_np, self.comp_p1, self.comp_p2,
                self.raw_np, self.raw_p1, self.raw_p2)


def _label_vector(labels: Any) -> np.ndarray:
    # Accept a PqfAnnotation or a bare 0/1 vector
    values = getattr(labels, 'labels', labels)
    return np.asarray(values, dtype=np.int64)


def nearest_pqfs(labels: Any, n: int) -> Optional[Tuple[int, int]]:
    """Return the nearest previous and subsequent PQF of frame ``n``.

    Frame ``n`` itself is never its own reference. When only one side has a
    PQF, that PQF fills both slots. A PQF with no other PQF in the sequence
    references itself; a non-PQF in a sequence without PQFs has no pair.

    Args:
        labels: PqfAnnotation or 0/1 vector
        n: Target frame index

    Returns:
        (p1, p2) frame indices, or None when no reference exists
    """
    values = _label_vector(labels)
    positions = np.flatnonzero(values == 1)

    before = positions[positions < n]
    after = positions[positions > n]
    p1 = int(before[-1]) if before.size else None
    p2 = int(after[0]) if after.size else None

    if p1 is None and p2 is None:
        if values[n] == 1:
            return n, n
        return None
    if p1 is None:
        p1 = p2
    if p2 is None:
        p2 = p1
    return p1, p2


def neighbor_references(length: int, n: int) -> Tuple[int, int]:
    """Adjacent frames as references, clamped at the sequence ends."""
    return max(n - 1, 0), min(n + 1, length - 1)


def _flip(patches: Tuple[np.ndarray, ...], rng: np.random.Generator) -> Tuple[np.ndarray, ...]:
    # One draw per sample so all six patches stay co-located
    if rng.random() < 0.5:
        patches = tuple(p[:, ::-1] for p in patches)
    if rng.random() < 0.5:
        patches = tuple(p[::-1, :] for p in patches)
    return tuple(np.ascontiguousarray(p) for p in patches)


def extract_training_samples(raw: Sequence, comp: Sequence, labels: Any, patch: int = 64,
                             stride: Optional[int] = None, include_pqf_targets: bool = True,
                             augment: bool = False,
                             rng: Optional[np.random.Generator] = None) -> List[TrainingSample]:
    """Segment an aligned raw/compressed pair into co-located patch samples.

    Args:
        raw: Uncompressed sequence
        comp: Compressed sequence aligned with ``raw``
        labels: PqfAnnotation or 0/1 vector of length N
        patch: Patch side in pixels
        stride: Grid step in pixels, defaults to ``patch``
        include_pqf_targets: Also emit samples whose target is a PQF
        augment: Random horizontal/vertical flips, shared by all six patches
        rng: Source of randomness for augmentation

    Returns:
        Samples ordered by frame, then grid row, then grid column

    Raises:
        AlignmentError: If raw, comp and labels do not line up
        VideoFormatError: If the frames are smaller than the patch
    """
    validator = Input_Validator()
    validator.require_aligned(raw, comp)
    values = _label_vector(labels)
    validator.require_labels(values, len(raw))

    stride = stride or patch
    if patch < 1 or stride < 1:
        raise VideoFormatError("patch and stride must be positive")
    if raw.width < max(patch, MIN_PATCH_FRAME) or raw.height < max(patch, MIN_PATCH_FRAME):
        raise VideoFormatError(
            f"Frames of {raw.width}x{raw.height} are too small for {patch}x{patch} training patches"
        )
    if augment and rng is None:
        rng = np.random.default_rng(0)

    rows = range(0, raw.height - patch + 1, stride)
    cols = range(0, raw.width - patch + 1, stride)

    samples: List[TrainingSample] = []
    skipped = 0
    for n in range(len(raw)):
        is_pqf = bool(values[n] == 1)
        if is_pqf and not include_pqf_targets:
            continue
        pair = nearest_pqfs(values, n)
        if pair is None:
            skipped += 1
            continue
        p1, p2 = pair
        for y in rows:
            for x in cols:
                window = (slice(y, y + patch), slice(x, x + patch))
                patches = (
                    comp.frames[n].luma[window], comp.frames[p1].luma[window],
                    comp.frames[p2].luma[window], raw.frames[n].luma[window],
                    raw.frames[p1].luma[window], raw.frames[p2].luma[window],
                )
                if augment:
                    patches = _flip(patches, rng)
                else:
                    patches = tuple(p.copy() for p in patches)
                samples.append(TrainingSample(
                    *patches, frame_index=n, p1_index=p1, p2_index=p2,
                    y=y, x=x, target_is_pqf=is_pqf,
                ))

    if skipped:
        logger.warning("Skipped %d frames without any PQF reference", skipped)
    logger.debug("Extracted %d training samples from %d frames", len(samples), len(raw))
    return samples


def split_by_target(samples: SequenceType[TrainingSample]) -> Tuple[List[TrainingSample], List[TrainingSample]]:
    """Split samples into (non-PQF targets, PQF targets)."""
    non_pqf = [s for s in samples if not s.target_is_pqf]
    pqf = [s for s in samples if s.target_is_pqf]
    return non_pqf, pqf
