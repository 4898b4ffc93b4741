"""Per-frame 38-dimension feature vectors and their z-score normalizer."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence as SequenceType

import numpy as np

from ..errors import ValidationFailure
from .nss import PIXEL_FEATURES, nss_features

logger = logging.getLogger(__name__)

COMPRESSED_FEATURES = 2
FEATURE_DIM = COMPRESSED_FEATURES + PIXEL_FEATURES

DEGENERATE_SD = 1e-12

PixelExtractor = Callable[[np.ndarray], np.ndarray]


class FeatureError(ValidationFailure):
    """Raised when features cannot be extracted or normalized."""
    pass


def extract_features(seq, meta: SequenceType[Any], extractor: Optional[PixelExtractor] = None,
                     workers: Optional[int] = None) -> np.ndarray:
    """
    Build the detector input for every frame of a compressed sequence.

    Row n is [bits_n, qp_n] followed by the 36 pixel-domain features of
    frame n.

    Args:
        seq: Compressed sequence
        meta: One FrameMetadata per frame
        extractor: Pixel-domain extractor returning 36 values per luma plane
        workers: Thread count for per-frame extraction; None runs serially

    Returns:
        (N, 38) float64 feature matrix

    Raises:
        FeatureError: On a metadata length mismatch or non-finite features
    """
    if len(meta) != len(seq):
        raise FeatureError(f"Metadata describes {len(meta)} frames, sequence has {len(seq)}")

    extractor = extractor or nss_features
    planes = [frame.luma for frame in seq.frames]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pixel = list(pool.map(extractor, planes))
    else:
        pixel = [extractor(plane) for plane in planes]

    rows = []
    for index, (record, values) in enumerate(zip(meta, pixel)):
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size != PIXEL_FEATURES:
            raise FeatureError(f"Pixel extractor returned {values.size} values for frame {index}, expected {PIXEL_FEATURES}")
        rows.append(np.concatenate(([float(record.bits), float(record.qp)], values)))

    features = np.vstack(rows) if rows else np.zeros((0, FEATURE_DIM))
    if not np.isfinite(features).all():
        raise FeatureError("Feature extraction produced non-finite values")

    logger.debug("Extracted %d feature vectors", features.shape[0])
    return features


@dataclass
class FeatureNormalizer:
    """Per-dimension training mean and SD for z-scoring."""
    mean: np.ndarray
    std: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=np.float64) - self.mean) / self.std

    def invert(self, normalized: np.ndarray) -> np.ndarray:
        return np.asarray(normalized, dtype=np.float64) * self.std + self.mean

    def to_dict(self) -> Dict[str, list]:
        return {'mean': self.mean.tolist(), 'std': self.std.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "FeatureNormalizer":
        return cls(mean=np.asarray(data['mean'], dtype=np.float64),
                   std=np.asarray(data['std'], dtype=np.float64))


def fit_normalizer(train_features: np.ndarray) -> FeatureNormalizer:
    """Fit z-score statistics on a training matrix.

    Dimensions with zero population SD get SD 1 and a warning.

    Raises:
        FeatureError: With fewer than two training vectors
    """
    matrix = np.atleast_2d(np.asarray(train_features, dtype=np.float64))
    if matrix.shape[0] < 2:
        raise FeatureError(f"Normalizer needs at least 2 training vectors, got {matrix.shape[0]}")

    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    # Rounding in the mean leaves residue on constant columns
    degenerate = std <= DEGENERATE_SD * np.maximum(np.abs(mean), 1.0)
    if degenerate.any():
        logger.warning("Feature dimension(s) %s have zero SD; using SD 1",
                       np.flatnonzero(degenerate).tolist())
        std = np.where(degenerate, 1.0, std)
    return FeatureNormalizer(mean=mean, std=std)


def apply_normalizer(features: np.ndarray, norm: FeatureNormalizer) -> np.ndarray:
    """Z-score features with stored statistics."""
    return norm.apply(features)


def save_features(features: np.ndarray, path: str) -> None:
    """Write one frame per row as comma-separated text."""
    np.savetxt(path, np.atleast_2d(features), delimiter=',', fmt='%.17g',
               header=f"{FEATURE_DIM} features per frame: bits, qp, 36 pixel-domain")


def load_features(path: str) -> np.ndarray:
    """Read a matrix written by ``save_features``."""
    try:
        features = np.loadtxt(path, delimiter=',', ndmin=2)
    except (OSError, ValueError) as e:
        raise FeatureError(f"Cannot read features from {path}: {e}")
    if features.shape[1] != FEATURE_DIM:
        raise FeatureError(f"{path} holds {features.shape[1]} columns, expected {FEATURE_DIM}")
    return features
