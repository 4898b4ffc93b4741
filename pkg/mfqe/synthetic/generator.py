"""
Synthetic compressed clips with a known quality fluctuation.

A textured scene pans with a constant sub-pixel velocity. Every
``pqf_period``-th frame is only lightly corrupted; the others get stronger
blur and noise the farther they are from such a frame, and every frame is
rounded to 8 bits. Per-frame bits and QP follow the corruption strength, so
the compressed-domain features carry the same signal an encoder log would.
"""

import logging
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from scipy import ndimage

from ..detection import ground_truth_labels
from ..metrics import PSNR, quality_curve
from ..video import LUMA_LEVELS, FrameMetadata, Sequence, quantize_luma, write_metadata, write_yuv420

logger = logging.getLogger(__name__)

FIXTURE_FRAMES = 10
FIXTURE_RAW = 'raw.yuv'
FIXTURE_COMP = 'comp.yuv'
FIXTURE_META = 'meta.csv'


@dataclass
class CorruptionConfig:
    """Corruption strength as a function of distance to the nearest low-corruption frame."""
    pqf_period: int = 4
    pqf_offset: int = 1
    base_blur: float = 0.4  # Gaussian sigma (pixels) on low-corruption frames
    blur_step: float = 0.5  # Added sigma per frame of distance
    base_noise: float = 0.004  # Noise SD on low-corruption frames
    noise_step: float = 0.01  # Added noise SD per frame of distance
    base_qp: int = 32
    qp_step: int = 3
    max_speed: float = 0.6  # Pixels per frame along each axis


@dataclass
class SyntheticClip:
    """One generated clip: raw and compressed sequences, metadata and PQF labels."""
    raw: Sequence
    comp: Sequence
    meta: List[FrameMetadata]
    labels: np.ndarray
    velocity: tuple
    distances: np.ndarray


def _texture(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    noise = ndimage.gaussian_filter(rng.normal(size=(height, width)), sigma=1.5)
    noise /= np.abs(noise).max() or 1.0
    y, x = np.mgrid[0:height, 0:width]
    waves = np.zeros((height, width))
    for _ in range(3):
        fy, fx = rng.uniform(0.02, 0.15, size=2)
        phase = rng.uniform(0, 2 * math.pi)
        waves += np.sin(2 * math.pi * (fy * y + fx * x) + phase)
    scene = 0.6 * noise + 0.4 * waves / 3.0
    scene = (scene - scene.min()) / (np.ptp(scene) or 1.0)
    return 0.1 + 0.8 * scene


def _to_levels(luma: np.ndarray) -> np.ndarray:
    return quantize_luma(luma).astype(np.float64) / LUMA_LEVELS


def pqf_distances(frames: int, period: int, offset: int) -> np.ndarray:
    """Distance of every frame to the nearest designated low-corruption frame."""
    anchors = np.arange(offset % period, frames, period)
    if anchors.size == 0:
        anchors = np.array([0])
    positions = np.arange(frames)
    return np.abs(positions[:, None] - anchors[None, :]).min(axis=1)


def make_clip(frames: int = 30, width: int = 64, height: int = 64, seed: int = 0,
              corruption: Optional[CorruptionConfig] = None, frame_rate: float = 30.0) -> SyntheticClip:
    """
    Generate one raw/compressed clip pair.

    Args:
        frames: Number of frames
        width: Frame width (even)
        height: Frame height (even)
        seed: Seed of every random draw in the clip
        corruption: Corruption schedule
        frame_rate: Frame rate stored on the sequences

    Returns:
        SyntheticClip whose labels are the ground-truth PQFs of its PSNR curve
    """
    c = corruption or CorruptionConfig()
    rng = np.random.default_rng(seed)

    velocity = tuple(float(v) for v in rng.uniform(-c.max_speed, c.max_speed, size=2))
    margin = int(math.ceil(c.max_speed * frames)) + 8
    canvas = _texture(height + 2 * margin, width + 2 * margin, rng)

    distances = pqf_distances(frames, c.pqf_period, c.pqf_offset)
    raw_planes, comp_planes, meta = [], [], []
    for n in range(frames):
        shifted = ndimage.shift(canvas, (velocity[1] * n, velocity[0] * n), order=3, mode='reflect')
        raw = _to_levels(shifted[margin:margin + height, margin:margin + width])

        d = int(distances[n])
        blurred = ndimage.gaussian_filter(raw, sigma=c.base_blur + c.blur_step * d, mode='reflect')
        noisy = blurred + rng.normal(scale=c.base_noise + c.noise_step * d, size=raw.shape)
        comp = _to_levels(noisy)

        qp = min(c.base_qp + c.qp_step * d, 51)
        bits = int(round(width * height * 2.0 * 2.0 ** (-(qp - 22) / 6.0) * rng.uniform(0.95, 1.05)))
        raw_planes.append(raw)
        comp_planes.append(comp)
        meta.append(FrameMetadata(bits=bits, qp=qp))

    raw_seq = Sequence.from_luma(np.stack(raw_planes), frame_rate=frame_rate)
    comp_seq = Sequence.from_luma(np.stack(comp_planes), frame_rate=frame_rate)
    labels = ground_truth_labels(quality_curve(raw_seq, comp_seq, PSNR)) if frames >= 3 else np.zeros(frames, dtype=np.int64)
    logger.debug("Clip seed %d: velocity (%.3f, %.3f), %d PQFs", seed, velocity[0], velocity[1], int(labels.sum()))
    return SyntheticClip(raw=raw_seq, comp=comp_seq, meta=meta, labels=labels,
                         velocity=velocity, distances=distances)


def make_corpus(clips: int = 20, frames: int = 30, width: int = 64, height: int = 64,
                seed: int = 0, corruption: Optional[CorruptionConfig] = None) -> List[SyntheticClip]:
    """Generate ``clips`` independent clips seeded ``seed``, ``seed + 1``, ..."""
    corpus = [make_clip(frames, width, height, seed + index, corruption) for index in range(clips)]
    logger.info("Generated %d synthetic clips of %d frames at %dx%d", clips, frames, width, height)
    return corpus


def write_fixture(directory: str, frames: int = FIXTURE_FRAMES, width: int = 64, height: int = 64,
                  seed: int = 0) -> Dict[str, str]:
    """
    Write a small clip as ``raw.yuv``, ``comp.yuv`` and ``meta.csv``.

    Returns:
        Mapping of 'raw', 'comp' and 'meta' to the written paths
    """
    os.makedirs(directory, exist_ok=True)
    clip = make_clip(frames, width, height, seed)
    paths = {
        'raw': os.path.join(directory, FIXTURE_RAW),
        'comp': os.path.join(directory, FIXTURE_COMP),
        'meta': os.path.join(directory, FIXTURE_META),
    }
    write_yuv420(clip.raw, paths['raw'])
    write_yuv420(clip.comp, paths['comp'])
    write_metadata(clip.meta, paths['meta'])
    logger.info("Wrote %d-frame fixture to %s", frames, directory)
    return paths
