"""
Report formatting for command-line output.
"""

import math
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from ..detection import DetectorMetrics
from ..metrics import CorrelationCurve, FluctuationStats

TEXT = 'text'
YAML = 'yaml'
FORMATS = (TEXT, YAML)

SATURATED = 'saturated'


class Report_Formatter:
    """
    Formats reports, statistics and benchmark results for the terminal.

    Every formatter first builds plain data (dicts, lists, numbers, strings),
    then renders it either as an indented text block or as a YAML document.
    """

    def __init__(self, precision: int = 4, max_frames: Optional[int] = None):
        """
        Initialize the Report_Formatter.

        Args:
            precision: Digits after the decimal point for floats (default: 4)
            max_frames: Maximum per-frame rows to list (default: all)
        """
        self.precision = precision
        self.max_frames = max_frames

    def format_value(self, value: Any) -> Any:
        """
        Normalize a single value for output.

        Args:
            value: The value to format

        Returns:
            A YAML-safe scalar: rounded float, int, bool, string or None
        """
        if value is None or isinstance(value, (bool, str)):
            return value
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            value = float(value)
            if math.isnan(value):
                return 'nan'
            if math.isinf(value):
                return 'inf' if value > 0 else '-inf'
            return round(value, self.precision)
        return str(value)

    def _plain(self, data: Any) -> Any:
        if isinstance(data, dict):
            return {str(k): self._plain(v) for k, v in data.items()}
        if isinstance(data, (list, tuple, np.ndarray)):
            return [self._plain(v) for v in data]
        return self.format_value(data)

    def fluctuation_dict(self, stats: Optional[FluctuationStats]) -> Optional[Dict[str, Any]]:
        if stats is None:
            return None
        return {'sd': stats.sd, 'pvd': stats.pvd, 'ps': stats.ps, 'peaks': stats.peaks}

    def detector_dict(self, metrics: Optional[DetectorMetrics]) -> Optional[Dict[str, Any]]:
        if metrics is None:
            return None
        data = {
            'precision': metrics.precision,
            'recall': metrics.recall,
            'f1': metrics.f1,
            'true_positives': metrics.true_positives,
            'false_positives': metrics.false_positives,
            'false_negatives': metrics.false_negatives,
        }
        if metrics.notes:
            data['notes'] = list(metrics.notes)
        return data

    def correlation_dict(self, curve: CorrelationCurve) -> Dict[str, Any]:
        return {
            'lags': list(curve.lags),
            'mean_cc': list(curve.means),
            'sd_cc': list(curve.sds),
            'skipped_pairs': curve.skipped,
        }

    def _frames(self, rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
        if self.max_frames is not None:
            return rows[:self.max_frames]
        return rows

    def report_dict(self, report) -> Dict[str, Any]:
        """
        Build the structured form of an EnhancementReport.

        Args:
            report: EnhancementReport from the pipeline

        Returns:
            Dictionary with summary, fluctuation, detector and per-frame sections
        """
        frames = []
        for n in range(len(report)):
            delta = float(report.delta_psnr[n])
            frames.append({
                'frame': n,
                'pqf': int(report.labels[n]),
                'psnr_before': float(report.psnr_before[n]),
                'psnr_after': float(report.psnr_after[n]),
                'delta_psnr': SATURATED if math.isinf(delta) and delta > 0 else delta,
                'delta_ssim': float(report.delta_ssim[n]),
            })

        data = {
            'summary': {
                'frames': len(report),
                'pqfs': int(np.sum(report.labels == 1)),
                'delta_psnr': report.psnr_averages.overall,
                'delta_psnr_pqf': report.psnr_averages.pqf,
                'delta_psnr_non_pqf': report.psnr_averages.non_pqf,
                'delta_ssim': report.ssim_averages.overall,
                'delta_ssim_pqf': report.ssim_averages.pqf,
                'delta_ssim_non_pqf': report.ssim_averages.non_pqf,
                'saturated_frames': report.saturated_frames,
            },
            'fluctuation_before': self.fluctuation_dict(report.fluctuation_before),
            'fluctuation_after': self.fluctuation_dict(report.fluctuation_after),
        }
        if report.fps is not None:
            data['summary']['fps'] = report.fps
        if report.detector is not None:
            data['detector'] = self.detector_dict(report.detector)
        if report.notes:
            data['notes'] = list(report.notes)
        data['frames'] = self._frames(frames)
        return data

    def benchmark_dict(self, results) -> Dict[str, Any]:
        """Structured form of one or more BenchmarkResults."""
        if not isinstance(results, (list, tuple)):
            results = [results]
        return {
            'parameters': results[0].parameters if results else None,
            'reference_parameters': results[0].reference_parameters if results else None,
            'operations_per_64x64_patch': dict(results[0].operations) if results else None,
            'machine': dict(results[0].machine) if results else None,
            'runs': [{
                'resolution': f"{r.width}x{r.height}",
                'fps': r.fps,
                'frames': r.frames,
                'run_fps': list(r.runs),
            } for r in results],
        }

    def bd_dict(self, bd_rate: float, bd_psnr: Optional[float] = None) -> Dict[str, Any]:
        data = {'bd_rate_percent': bd_rate}
        if bd_psnr is not None:
            data['bd_psnr_db'] = bd_psnr
        return data

    def to_yaml(self, data: Dict[str, Any]) -> str:
        return yaml.safe_dump(self._plain(data), sort_keys=False, default_flow_style=False)

    def to_text(self, data: Dict[str, Any], title: Optional[str] = None) -> str:
        """
        Render structured data as an indented text block.

        Lists of mappings become aligned tables; other lists are printed inline.

        Args:
            data: Structured data from one of the ``*_dict`` builders
            title: Optional heading

        Returns:
            Multi-line string
        """
        lines: List[str] = []
        if title:
            lines.append(title)
            lines.append('=' * len(title))
        self._text_lines(self._plain(data), 0, lines)
        return '\n'.join(lines) + '\n'

    def _text_lines(self, data: Any, indent: int, lines: List[str]) -> None:
        pad = '  ' * indent
        for key, value in data.items():
            if value is None:
                lines.append(f"{pad}{key}: n/a")
            elif isinstance(value, dict):
                lines.append(f"{pad}{key}:")
                self._text_lines(value, indent + 1, lines)
            elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
                lines.append(f"{pad}{key}:")
                lines.extend(self._table(value, indent + 1))
            elif isinstance(value, list):
                lines.append(f"{pad}{key}: {', '.join(str(v) for v in value)}")
            else:
                lines.append(f"{pad}{key}: {value}")

    def _table(self, rows: List[Dict[str, Any]], indent: int) -> List[str]:
        pad = '  ' * indent
        columns = list(rows[0].keys())
        cells = [[str(row.get(c, '')) for c in columns] for row in rows]
        widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(columns)]
        out = [pad + '  '.join(c.rjust(w) for c, w in zip(columns, widths))]
        for row in cells:
            out.append(pad + '  '.join(v.rjust(w) for v, w in zip(row, widths)))
        return out

    def render(self, data: Dict[str, Any], output_format: str = TEXT, title: Optional[str] = None) -> str:
        """Render in the requested format ('text' or 'yaml')."""
        if output_format == YAML:
            return self.to_yaml(data)
        return self.to_text(data, title)
