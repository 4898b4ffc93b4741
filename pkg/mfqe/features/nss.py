"""
Natural-scene-statistics features of a luma plane.

Per scale: a generalized Gaussian fit (shape, variance) of the mean-subtracted
contrast-normalized (MSCN) coefficients, and asymmetric generalized Gaussian
fits (shape, mean, left variance, right variance) of the horizontal, vertical
and two diagonal neighbour products. Two scales give 36 values.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.ndimage import gaussian_filter
from scipy.special import gamma
from skimage.transform import downscale_local_mean

logger = logging.getLogger(__name__)

PIXEL_FEATURES = 36
SCALES = 2

MSCN_SIGMA = 7.0 / 6.0
MSCN_RADIUS = 3
# Stabilizer for unit-range luma (1 on the 8-bit scale)
MSCN_C = 1.0 / 255.0

# Fallbacks when the coefficients carry no energy (flat frames)
FALLBACK_SHAPE = 2.0
FALLBACK_VARIANCE = 0.0
FALLBACK_MEAN = 0.0
DEGENERATE_ENERGY = 1e-12

_SHAPES = np.arange(0.2, 10.0, 0.001)
_GGD_RATIO = gamma(1.0 / _SHAPES) * gamma(3.0 / _SHAPES) / gamma(2.0 / _SHAPES) ** 2
_AGGD_RATIO = gamma(2.0 / _SHAPES) ** 2 / (gamma(1.0 / _SHAPES) * gamma(3.0 / _SHAPES))


def mscn_coefficients(luma: np.ndarray) -> np.ndarray:
    """Normalize a plane by its local Gaussian mean and deviation."""
    image = np.asarray(luma, dtype=np.float64)
    mu = gaussian_filter(image, MSCN_SIGMA, mode='nearest', radius=MSCN_RADIUS)
    second = gaussian_filter(image * image, MSCN_SIGMA, mode='nearest', radius=MSCN_RADIUS)
    sigma = np.sqrt(np.abs(second - mu * mu))
    return (image - mu) / (sigma + MSCN_C)


def fit_ggd(x: np.ndarray) -> Tuple[float, float]:
    """Moment-matching GGD fit; returns (shape, variance)."""
    values = np.asarray(x, dtype=np.float64).ravel()
    variance = float(np.mean(values ** 2))
    if variance < DEGENERATE_ENERGY:
        return FALLBACK_SHAPE, FALLBACK_VARIANCE

    mean_abs = float(np.mean(np.abs(values)))
    rho = variance / mean_abs ** 2
    shape = float(_SHAPES[np.argmin(np.abs(rho - _GGD_RATIO))])
    return shape, variance


def fit_aggd(x: np.ndarray) -> Tuple[float, float, float, float]:
    """Moment-matching AGGD fit; returns (shape, mean, left variance, right variance)."""
    values = np.asarray(x, dtype=np.float64).ravel()
    left = values[values < 0]
    right = values[values > 0]
    energy = float(np.mean(values ** 2))
    if energy < DEGENERATE_ENERGY or left.size == 0 or right.size == 0:
        return FALLBACK_SHAPE, FALLBACK_MEAN, FALLBACK_VARIANCE, FALLBACK_VARIANCE

    left_std = float(np.sqrt(np.mean(left ** 2)))
    right_std = float(np.sqrt(np.mean(right ** 2)))
    gamma_hat = left_std / right_std
    r_hat = float(np.mean(np.abs(values))) ** 2 / energy
    r_norm = r_hat * (gamma_hat ** 3 + 1) * (gamma_hat + 1) / (gamma_hat ** 2 + 1) ** 2

    shape = float(_SHAPES[np.argmin((_AGGD_RATIO - r_norm) ** 2)])
    mean = (right_std - left_std) * (gamma(2.0 / shape) / gamma(1.0 / shape)) \
        * np.sqrt(gamma(1.0 / shape) / gamma(3.0 / shape))
    return shape, float(mean), left_std ** 2, right_std ** 2


def _scale_features(luma: np.ndarray) -> np.ndarray:
    mscn = mscn_coefficients(luma)
    products = (
        mscn[:, :-1] * mscn[:, 1:],
        mscn[:-1, :] * mscn[1:, :],
        mscn[:-1, :-1] * mscn[1:, 1:],
        mscn[1:, :-1] * mscn[:-1, 1:],
    )
    values = list(fit_ggd(mscn))
    for product in products:
        values.extend(fit_aggd(product))
    return np.array(values, dtype=np.float64)


def nss_features(luma: np.ndarray) -> np.ndarray:
    """The 36 pixel-domain features of one luma plane (full and half scale)."""
    image = np.asarray(luma, dtype=np.float64)
    scales = [image]
    for _ in range(SCALES - 1):
        scales.append(downscale_local_mean(scales[-1], (2, 2)))
    return np.concatenate([_scale_features(s) for s in scales])
