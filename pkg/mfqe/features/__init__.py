# Detector feature extraction module

from .nss import (
    PIXEL_FEATURES, FALLBACK_SHAPE, FALLBACK_VARIANCE, FALLBACK_MEAN, mscn_coefficients,
    fit_ggd, fit_aggd, nss_features,
)
from .extractor import (
    FEATURE_DIM, FeatureError, FeatureNormalizer, extract_features, fit_normalizer,
    apply_normalizer, save_features, load_features,
)

__all__ = [
    'PIXEL_FEATURES', 'FALLBACK_SHAPE', 'FALLBACK_VARIANCE', 'FALLBACK_MEAN',
    'mscn_coefficients', 'fit_ggd', 'fit_aggd', 'nss_features', 'FEATURE_DIM', 'FeatureError',
    'FeatureNormalizer', 'extract_features', 'fit_normalizer', 'apply_normalizer',
    'save_features', 'load_features',
]
