import math

import numpy as np
import pytest
import yaml

from mfqe.detection import DetectorMetrics
from mfqe.formatting import (
    SATURATED, TEXT, YAML, Report_Formatter, plot_cc_curve, plot_delta_bars, plot_loss_trace,
    plot_motion_magnitude, plot_psnr_curves,
)
from mfqe.metrics import CorrelationCurve, FluctuationStats
from mfqe.motion import MotionField
from mfqe.pipeline import BenchmarkResult, EnhancementReport, SplitAverages
from mfqe.training import TraceRow


@pytest.fixture
def formatter():
    return Report_Formatter(precision=3)


@pytest.fixture
def report():
    return EnhancementReport(
        delta_psnr=np.array([0.5, math.inf, 0.25]),
        delta_ssim=np.array([0.01, 0.02, 0.0]),
        psnr_before=np.array([30.0, 33.0, 31.0]),
        psnr_after=np.array([30.5, math.inf, 31.25]),
        labels=np.array([0, 1, 0]),
        psnr_averages=SplitAverages(overall=0.375, pqf=math.inf, non_pqf=0.375),
        ssim_averages=SplitAverages(overall=0.01, pqf=0.02, non_pqf=0.005),
        fluctuation_before=FluctuationStats(sd=1.2472, pvd=2.0, ps=None, peaks=1),
        saturated_frames=1,
        detector=DetectorMetrics(precision=None, recall=0.0, f1=0.0,
                                 notes=['precision undefined: no frames predicted as PQF']),
        notes=['fluctuation after enhancement unavailable'],
    )


@pytest.mark.parametrize('value, expected', [
    (1.23456, 1.235),
    (math.inf, 'inf'),
    (-math.inf, '-inf'),
    (math.nan, 'nan'),
    (np.int64(3), 3),
    (np.float32(0.5), 0.5),
    (None, None),
    (True, True),
])
def test_format_value(formatter, value, expected):
    assert formatter.format_value(value) == expected


def test_report_dict_marks_saturated_frames(formatter, report):
    data = formatter.report_dict(report)
    assert data['summary']['frames'] == 3
    assert data['summary']['pqfs'] == 1
    assert data['summary']['saturated_frames'] == 1
    assert data['frames'][1]['delta_psnr'] == SATURATED
    assert data['frames'][0]['delta_psnr'] == 0.5
    assert data['fluctuation_after'] is None
    assert 'fps' not in data['summary']


def test_max_frames_limits_rows(report):
    assert len(Report_Formatter(max_frames=2).report_dict(report)['frames']) == 2


def test_yaml_output_parses(formatter, report):
    parsed = yaml.safe_load(formatter.render(formatter.report_dict(report), YAML))
    assert parsed['summary']['delta_psnr_pqf'] == 'inf'
    assert parsed['fluctuation_before']['ps'] is None
    assert parsed['detector']['notes'] == ['precision undefined: no frames predicted as PQF']
    assert list(parsed)[0] == 'summary'


def test_text_output(formatter, report):
    text = formatter.render(formatter.report_dict(report), TEXT, title='Evaluation')
    lines = text.splitlines()
    assert lines[:2] == ['Evaluation', '==========']
    assert '  delta_psnr: 0.375' in lines
    assert 'fluctuation_after: n/a' in lines
    assert any(SATURATED in line for line in lines)
    header = next(line for line in lines if 'psnr_before' in line)
    assert header.split() == ['frame', 'pqf', 'psnr_before', 'psnr_after', 'delta_psnr', 'delta_ssim']


def test_correlation_and_bd_dicts(formatter):
    curve = CorrelationCurve(lags=[1, 2], means=[0.9, 0.8], sds=[0.01, 0.02], skipped=0)
    text = formatter.to_text(formatter.correlation_dict(curve))
    assert 'lags: 1, 2' in text
    assert formatter.bd_dict(-12.5, 0.61) == {'bd_rate_percent': -12.5, 'bd_psnr_db': 0.61}
    assert formatter.bd_dict(3.0) == {'bd_rate_percent': 3.0}


def test_benchmark_dict(formatter):
    result = BenchmarkResult(fps=24.0, width=416, height=240, frames=4, runs=[23.0, 24.0, 25.0],
                             parameters=236_147, operations={'multiplications': 10, 'additions': 9},
                             machine={'device': 'cpu'})
    data = formatter.benchmark_dict([result])
    assert data['parameters'] == 236_147
    assert data['reference_parameters'] == 255_422
    assert data['runs'][0]['resolution'] == '416x240'
    assert yaml.safe_load(formatter.to_yaml(data))['runs'][0]['fps'] == 24.0


def test_figures_are_written(tmp_path, report):
    trace = [TraceRow(step=n, stage=1 if n < 3 else 2, a=1.0, b=0.01, l_mc=1.0 / n,
                      l_qe=2.0 / n, total=1.0 / n + 0.02 / n) for n in range(1, 6)]
    curve = CorrelationCurve(lags=[1, 2, 3], means=[0.9, 0.8, 0.7], sds=[0.01, 0.02, 0.03])
    field = MotionField(mv_x=np.ones((4, 6)), mv_y=np.zeros((4, 6)))

    paths = [
        plot_psnr_curves(report.psnr_before, report.psnr_after, str(tmp_path / 'psnr.png'),
                         labels=report.labels),
        plot_delta_bars(report, str(tmp_path / 'bars.png')),
        plot_cc_curve(curve, str(tmp_path / 'cc.png')),
        plot_loss_trace(trace, str(tmp_path / 'nested' / 'loss.png')),
        plot_motion_magnitude(field, str(tmp_path / 'mv.png')),
    ]
    for path in paths:
        with open(path, 'rb') as handle:
            assert handle.read(8) == b'\x89PNG\r\n\x1a\n'
