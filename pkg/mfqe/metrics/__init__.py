# Quality, fluctuation and rate-distortion metrics module

from .quality import (
    PSNR, SSIM, INFINITE_PSNR, MetricError, QualityCurve, mse, psnr, ssim, quality_curve,
)
from .fluctuation import (
    FluctuationStats, CorrelationCurve, local_peaks, local_valleys, peak_valley_difference,
    peak_separation, fluctuation_stats, pearson, cc_curve,
)
from .rd import RdPoint, bd_rate, bd_psnr, load_rd_points, write_rd_points

__all__ = [
    'PSNR', 'SSIM', 'INFINITE_PSNR', 'MetricError', 'QualityCurve', 'mse', 'psnr', 'ssim',
    'quality_curve', 'FluctuationStats', 'CorrelationCurve', 'local_peaks', 'local_valleys',
    'peak_valley_difference', 'peak_separation', 'fluctuation_stats', 'pearson', 'cc_curve',
    'RdPoint', 'bd_rate', 'bd_psnr', 'load_rd_points', 'write_rd_points',
]
