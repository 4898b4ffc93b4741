import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from mfqe.metrics import (
    SSIM, MetricError, QualityCurve, RdPoint, bd_psnr, bd_rate, cc_curve, fluctuation_stats,
    load_rd_points, local_peaks, local_valleys, mse, peak_separation, peak_valley_difference,
    pearson, psnr, quality_curve, ssim, write_rd_points,
)
from mfqe.validation import AlignmentError
from mfqe.video import Sequence

ANCHOR = [RdPoint(rate=r, quality=q, qp=qp) for qp, r, q in (
    (42, 200.0, 30.1), (37, 410.0, 32.6), (32, 850.0, 35.2), (27, 1800.0, 37.9))]


def test_psnr_of_identical_frames_is_infinite(rng):
    plane = rng.random((8, 8))
    assert psnr(plane, plane) == math.inf


def test_psnr_closed_form():
    a = np.zeros((4, 4))
    b = np.full((4, 4), 0.1)
    assert mse(a, b) == pytest.approx(0.01)
    assert psnr(a, b) == pytest.approx(20.0)


def test_psnr_size_mismatch():
    with pytest.raises(AlignmentError):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


def test_ssim_of_identical_frames_is_one(rng):
    plane = rng.random((32, 32))
    assert ssim(plane, plane) == pytest.approx(1.0)


def test_ssim_drops_with_noise(rng):
    plane = rng.random((32, 32))
    noisy = np.clip(plane + rng.normal(0, 0.1, plane.shape), 0, 1)
    assert ssim(plane, noisy) < 0.99


def test_ssim_rejects_tiny_frames():
    with pytest.raises(MetricError, match='11x11'):
        ssim(np.zeros((8, 32)), np.zeros((8, 32)))


def naive_psnr(a, b):
    total = 0.0
    for y in range(a.shape[0]):
        for x in range(a.shape[1]):
            total += (a[y, x] - b[y, x]) ** 2
    return 10.0 * math.log10(1.0 / (total / a.size))


def naive_ssim(a, b, sigma=1.5, radius=5):
    """Weighted window statistics computed position by position."""
    offsets = np.arange(-radius, radius + 1)
    g = np.exp(-0.5 * (offsets / sigma) ** 2)
    g /= g.sum()
    weights = np.outer(g, g)
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    scores = []
    for y in range(radius, a.shape[0] - radius):
        for x in range(radius, a.shape[1] - radius):
            wa = a[y - radius:y + radius + 1, x - radius:x + radius + 1]
            wb = b[y - radius:y + radius + 1, x - radius:x + radius + 1]
            mu_a = np.sum(weights * wa)
            mu_b = np.sum(weights * wb)
            var_a = np.sum(weights * wa * wa) - mu_a ** 2
            var_b = np.sum(weights * wb * wb) - mu_b ** 2
            cov = np.sum(weights * wa * wb) - mu_a * mu_b
            scores.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                          / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
    return float(np.mean(scores))


@pytest.mark.parametrize('shape', [(12, 12), (16, 23)])
def test_psnr_matches_explicit_loop(rng, shape):
    a = rng.random(shape)
    b = np.clip(a + rng.normal(scale=0.05, size=shape), 0.0, 1.0)
    assert psnr(a, b) == pytest.approx(naive_psnr(a, b), rel=1e-12)


@pytest.mark.parametrize('shape, noise', [((16, 16), 0.05), ((20, 27), 0.2), ((11, 11), 0.01)])
def test_ssim_matches_sliding_gaussian_window(rng, shape, noise):
    a = rng.random(shape)
    b = np.clip(a + rng.normal(scale=noise, size=shape), 0.0, 1.0)
    assert ssim(a, b) == pytest.approx(naive_ssim(a, b), abs=1e-6)


def test_quality_curve(rng):
    raw = Sequence.from_luma(rng.random((3, 16, 16)))
    comp = raw.with_luma(raw.luma_stack() + 0.01)
    curve = quality_curve(raw, comp)
    np.testing.assert_allclose(curve.values, [40.0] * 3)
    assert curve.is_finite()
    assert quality_curve(raw, raw, SSIM).values.tolist() == pytest.approx([1.0] * 3)


def test_quality_curve_rejects_unknown_metric(rng):
    raw = Sequence.from_luma(rng.random((3, 16, 16)))
    with pytest.raises(MetricError):
        quality_curve(raw, raw, 'VMAF')


def test_finite_mean_skips_saturated_frames():
    assert QualityCurve(values=[30.0, math.inf, 34.0]).finite_mean() == 32.0
    assert QualityCurve(values=[math.inf]).finite_mean() == math.inf


def test_peaks_and_valleys_are_strict():
    values = [30, 33, 31, 31, 34, 29, 29, 35]
    assert local_peaks(values).tolist() == [1, 4]
    assert local_valleys(values).tolist() == []
    assert local_valleys([30, 28, 33, 26, 30]).tolist() == [1, 3]
    assert local_peaks([1, 2, 2, 1]).tolist() == []


def test_peak_valley_difference_prefers_later_valley_on_ties():
    values = [30, 28, 33, 26, 30]
    pvd, peaks = peak_valley_difference(values)
    # peak 33 at index 2 is equidistant from the valleys at 1 and 3
    assert peaks == 1
    assert pvd == pytest.approx(33 - 26)


def test_fluctuation_stats():
    curve = QualityCurve(values=[34.0, 30.0, 32.0, 30.0, 34.0, 30.0])
    stats = fluctuation_stats(curve, labels=[1, 0, 0, 0, 1, 0])
    assert stats.sd == pytest.approx(np.std(curve.values))
    assert stats.ps == 3.0


@pytest.mark.parametrize('values', [[30.0, 31.0], [30.0, math.inf, 31.0, 32.0]])
def test_fluctuation_stats_errors(values):
    with pytest.raises(MetricError):
        fluctuation_stats(QualityCurve(values=values))


def test_peak_separation():
    assert peak_separation([1, 0, 0, 1, 0, 1]) == pytest.approx(1.5)
    assert peak_separation([0, 1, 0]) is None


def test_pearson(rng):
    plane = rng.random((8, 8))
    assert pearson(plane, 2 * plane + 1) == pytest.approx(1.0)
    assert pearson(plane, -plane) == pytest.approx(-1.0)
    assert pearson(plane, np.ones_like(plane)) is None


def test_pearson_of_independent_noise_is_near_zero(rng):
    values = [pearson(rng.normal(size=(64, 64)), rng.normal(size=(64, 64))) for _ in range(20)]
    # SD of the estimate is about 1/64 for 4096 pixels
    assert abs(np.mean(values)) < 0.02
    assert max(abs(v) for v in values) < 0.08


def test_cc_curve_of_alternating_sign_frames(rng):
    base = rng.random((16, 16))
    curve = cc_curve(Sequence.from_luma(np.stack([base, 1.0 - base, base, 1.0 - base])), max_lag=2)
    assert curve.means == pytest.approx([-1.0, 1.0])
    assert curve.sds == pytest.approx([0.0, 0.0], abs=1e-12)


def test_cc_curve_has_one_entry_per_lag(rng):
    base = rng.random((16, 16))
    frames = np.stack([np.roll(base, k, axis=1) * 0.5 + base * 0.5 for k in range(8)])
    curve = cc_curve(Sequence.from_luma(frames), max_lag=3)
    assert curve.lags == [1, 2, 3]
    assert len(curve.means) == 3 and len(curve.sds) == 3
    assert curve.skipped == 0


def test_cc_curve_needs_more_frames_than_lags(rng):
    with pytest.raises(MetricError):
        cc_curve(Sequence.from_luma(rng.random((3, 8, 8))), max_lag=3)


def test_cc_curve_skips_constant_frames(rng):
    frames = rng.random((4, 8, 8))
    frames[1] = 0.5
    curve = cc_curve(Sequence.from_luma(frames), max_lag=1)
    assert curve.skipped == 2


def test_bd_rate_of_identical_curves_is_zero():
    assert bd_rate(ANCHOR, ANCHOR) == pytest.approx(0.0, abs=1e-9)
    assert bd_psnr(ANCHOR, ANCHOR) == pytest.approx(0.0, abs=1e-9)


def test_bd_rate_of_doubled_rate_is_one_hundred_percent():
    doubled = [RdPoint(rate=2 * p.rate, quality=p.quality) for p in ANCHOR]
    assert bd_rate(ANCHOR, doubled) == pytest.approx(100.0, abs=0.01)
    assert bd_psnr(ANCHOR, doubled) < 0


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.3, max_value=3.0))
def test_bd_rate_of_scaled_rate(scale):
    scaled = [RdPoint(rate=scale * p.rate, quality=p.quality) for p in ANCHOR]
    assert bd_rate(ANCHOR, scaled) == pytest.approx(100.0 * (scale - 1.0), abs=1e-6)


def test_bd_rate_matches_numerical_integration():
    test = [RdPoint(rate=r, quality=q) for r, q in (
        (180.0, 30.4), (380.0, 33.0), (800.0, 35.5), (1700.0, 38.3))]
    aq = np.array([p.quality for p in ANCHOR])
    tq = np.array([p.quality for p in test])
    fa = np.polyfit(aq, np.log10([p.rate for p in ANCHOR]), 3)
    ft = np.polyfit(tq, np.log10([p.rate for p in test]), 3)
    low, high = max(aq.min(), tq.min()), min(aq.max(), tq.max())
    area, _ = quad(lambda q: np.polyval(ft, q) - np.polyval(fa, q), low, high)
    expected = 100.0 * (10 ** (area / (high - low)) - 1.0)
    assert bd_rate(ANCHOR, test) == pytest.approx(expected, rel=1e-6)


def test_bd_rate_needs_four_points():
    with pytest.raises(MetricError, match='Anchor'):
        bd_rate(ANCHOR[:3], ANCHOR)


def test_bd_rate_needs_quality_overlap():
    far = [RdPoint(rate=p.rate, quality=p.quality + 20) for p in ANCHOR]
    with pytest.raises(MetricError, match='overlap'):
        bd_rate(ANCHOR, far)


def test_rd_points_file_round_trip(tmp_path):
    path = tmp_path / 'anchor.csv'
    write_rd_points(ANCHOR, str(path))
    assert load_rd_points(str(path)) == ANCHOR


def test_rd_points_skip_comments(tmp_path):
    path = tmp_path / 'points.csv'
    path.write_text('# encoder run\n37,410,32.6\n')
    assert load_rd_points(str(path)) == [RdPoint(rate=410.0, quality=32.6, qp=37)]


def test_rd_points_bad_line(tmp_path):
    path = tmp_path / 'points.csv'
    path.write_text('37,410,32.6\n32,abc,35\n')
    with pytest.raises(MetricError, match=':2:'):
        load_rd_points(str(path))
