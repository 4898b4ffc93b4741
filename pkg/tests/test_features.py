import numpy as np
import pytest

from mfqe.features import (
    FALLBACK_SHAPE, FEATURE_DIM, PIXEL_FEATURES, FeatureError, FeatureNormalizer,
    apply_normalizer, extract_features, fit_aggd, fit_ggd, fit_normalizer, load_features,
    mscn_coefficients, nss_features, save_features,
)
from mfqe.video import FrameMetadata, Sequence


def test_feature_dimensions():
    assert PIXEL_FEATURES == 36
    assert FEATURE_DIM == 38


def test_nss_features_of_textured_plane(rng):
    values = nss_features(rng.random((48, 64)))
    assert values.shape == (36,)
    assert np.isfinite(values).all()


def test_flat_plane_uses_fallbacks():
    values = nss_features(np.full((32, 32), 0.4))
    per_scale = [FALLBACK_SHAPE, 0.0] + [FALLBACK_SHAPE, 0.0, 0.0, 0.0] * 4
    np.testing.assert_array_equal(values, per_scale * 2)


def test_mscn_of_flat_plane_is_zero():
    np.testing.assert_allclose(mscn_coefficients(np.full((8, 8), 0.7)), 0.0, atol=1e-9)


def test_ggd_fit_recovers_gaussian_and_laplacian_shapes(rng):
    shape, variance = fit_ggd(rng.normal(0.0, 0.5, 200_000))
    assert shape == pytest.approx(2.0, abs=0.05)
    assert variance == pytest.approx(0.25, rel=0.02)

    shape, _ = fit_ggd(rng.laplace(0.0, 1.0, 200_000))
    assert shape == pytest.approx(1.0, abs=0.1)


def test_aggd_fit_of_symmetric_samples(rng):
    shape, mean, left, right = fit_aggd(rng.normal(0.0, 1.0, 200_000))
    assert shape == pytest.approx(2.0, abs=0.1)
    assert mean == pytest.approx(0.0, abs=0.02)
    assert left == pytest.approx(right, rel=0.05)


def test_aggd_fit_sees_asymmetry(rng):
    samples = rng.normal(0.0, 1.0, 100_000)
    samples[samples > 0] *= 2.0
    _, mean, left, right = fit_aggd(samples)
    assert right > left
    assert mean > 0


def test_aggd_one_sided_input_falls_back():
    assert fit_aggd(np.abs(np.linspace(0.1, 1.0, 50))) == (FALLBACK_SHAPE, 0.0, 0.0, 0.0)


def sequence_and_meta(rng, frames=3):
    seq = Sequence.from_luma(rng.random((frames, 24, 24)))
    meta = [FrameMetadata(bits=1000 + n, qp=30 + n) for n in range(frames)]
    return seq, meta


def test_extract_features_layout(rng):
    seq, meta = sequence_and_meta(rng)
    features = extract_features(seq, meta)
    assert features.shape == (3, FEATURE_DIM)
    np.testing.assert_array_equal(features[:, 0], [1000, 1001, 1002])
    np.testing.assert_array_equal(features[:, 1], [30, 31, 32])
    np.testing.assert_array_equal(features[1, 2:], nss_features(seq.frames[1].luma))


def test_parallel_extraction_matches_serial(rng):
    seq, meta = sequence_and_meta(rng, frames=4)
    np.testing.assert_array_equal(extract_features(seq, meta, workers=3), extract_features(seq, meta))


def test_extract_features_metadata_mismatch(rng):
    seq, meta = sequence_and_meta(rng)
    with pytest.raises(FeatureError, match='Metadata'):
        extract_features(seq, meta[:2])


def test_extract_features_checks_custom_extractor(rng):
    seq, meta = sequence_and_meta(rng)
    with pytest.raises(FeatureError, match='expected 36'):
        extract_features(seq, meta, extractor=lambda plane: np.zeros(5))
    with pytest.raises(FeatureError, match='non-finite'):
        extract_features(seq, meta, extractor=lambda plane: np.full(36, np.nan))


def test_normalizer_z_scores_training_data(rng):
    train = rng.normal(5.0, 3.0, size=(50, 4))
    norm = fit_normalizer(train)
    scaled = apply_normalizer(train, norm)
    np.testing.assert_allclose(scaled.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(scaled.std(axis=0), 1.0)
    np.testing.assert_allclose(norm.invert(scaled), train)


def test_normalizer_constant_column_gets_unit_sd(rng, caplog):
    train = rng.random((10, 3))
    train[:, 1] = 0.37
    norm = fit_normalizer(train)
    assert norm.std[1] == 1.0
    assert 'zero SD' in caplog.text


def test_normalizer_needs_two_vectors():
    with pytest.raises(FeatureError):
        fit_normalizer(np.zeros((1, 38)))


def test_normalizer_dict_round_trip(rng):
    norm = fit_normalizer(rng.random((5, 38)))
    again = FeatureNormalizer.from_dict(norm.to_dict())
    np.testing.assert_array_equal(again.mean, norm.mean)
    np.testing.assert_array_equal(again.std, norm.std)


def test_features_file_round_trip(tmp_path, rng):
    features = rng.random((4, FEATURE_DIM))
    path = tmp_path / 'features.csv'
    save_features(features, str(path))
    np.testing.assert_array_equal(load_features(str(path)), features)


def test_load_features_checks_width(tmp_path):
    path = tmp_path / 'features.csv'
    np.savetxt(path, np.zeros((2, 5)), delimiter=',')
    with pytest.raises(FeatureError, match='expected 38'):
        load_features(str(path))
