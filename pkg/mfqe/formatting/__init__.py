# Result formatting module

from .formatter import Report_Formatter, TEXT, YAML, FORMATS, SATURATED
from .plotting import (
    plot_psnr_curves, plot_delta_bars, plot_cc_curve, plot_loss_trace, plot_motion_magnitude,
)

__all__ = [
    'Report_Formatter', 'TEXT', 'YAML', 'FORMATS', 'SATURATED', 'plot_psnr_curves',
    'plot_delta_bars', 'plot_cc_curve', 'plot_loss_trace', 'plot_motion_magnitude',
]
