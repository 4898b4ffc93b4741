import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from mfqe.config import DetectorConfig
from mfqe.detection import (
    Detector_Trainer, DetectorError, PqfAnnotation, PqfDetector, PqfDetectorNet,
    break_long_gaps, detect, detect_from_features, detector_forward, detector_metrics,
    ground_truth_labels, load_annotation, load_detector, make_windows, postprocess,
    remove_consecutive_pqfs, runs_of, save_detector, sequence_probabilities,
    train_detector, training_windows, write_annotation,
)
from mfqe.errors import TrainingError
from mfqe.features import FeatureNormalizer, extract_features
from mfqe.synthetic import make_corpus
from mfqe.training import CheckpointError
from mfqe.video import FrameMetadata, Sequence

probabilities = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=40)


def tiny_config(**overrides):
    values = dict(input_dim=4, hidden_units=6, window=4, batch_size=8, epochs=3,
                  learning_rate=1e-3)
    values.update(overrides)
    return DetectorConfig(**values)


def toy_sequences(rng, clips=3, frames=20):
    """Feature column 0 carries the label; the rest is noise."""
    sequences = []
    for _ in range(clips):
        labels = np.zeros(frames, dtype=np.int64)
        labels[1::4] = 1
        features = rng.normal(0.0, 0.1, size=(frames, 4))
        features[:, 0] += 2.0 * labels
        sequences.append((features, labels))
    return sequences


def test_postprocess_worked_example():
    labels = postprocess([0.9, 0.2, 0.4, 0.3, 0.1, 0.9], threshold=0.5, max_separation=3)
    assert labels.tolist() == [1, 0, 1, 0, 0, 1]


def test_strategy_one_keeps_most_probable_frame_of_a_run():
    labels = np.array([1, 1, 1, 0, 1, 1])
    probs = np.array([0.6, 0.9, 0.7, 0.1, 0.8, 0.8])
    assert remove_consecutive_pqfs(labels, probs).tolist() == [0, 1, 0, 0, 1, 0]


def test_strategy_two_promotes_interior_frames():
    labels = np.array([1, 0, 0, 0, 0, 0, 0, 0, 1])
    probs = np.array([1.0, 0.3, 0.2, 0.1, 0.4, 0.2, 0.1, 0.3, 1.0])
    assert break_long_gaps(labels, probs, 3).tolist() == [1, 0, 0, 0, 1, 0, 0, 0, 1]


def test_boundary_runs_are_broken():
    labels = postprocess([0.1, 0.2, 0.3, 0.2, 0.1, 0.9], max_separation=2)
    assert labels[2] == 1
    assert labels[5] == 1


def test_two_zero_runs_survive_with_separation_one():
    labels = postprocess([0.9, 0.1, 0.1, 0.9], max_separation=1)
    assert labels.tolist() == [1, 0, 0, 1]


def test_all_below_threshold_still_gets_pqfs():
    labels = postprocess(np.full(10, 0.1), max_separation=3)
    assert labels.sum() > 0


def test_runs_of():
    assert list(runs_of(np.array([0, 1, 1, 0, 1]), 1)) == [(1, 2), (4, 4)]
    assert list(runs_of(np.array([0, 0]), 0)) == [(0, 1)]


@pytest.mark.parametrize('probs, separation', [
    ([0.2, 1.2], 3),
    ([0.2, -0.1], 3),
    ([0.2, float('nan')], 3),
    ([0.2, 0.3], 0),
])
def test_postprocess_rejects_bad_input(probs, separation):
    with pytest.raises(DetectorError):
        postprocess(probs, max_separation=separation)


@settings(max_examples=200, deadline=None)
@given(probabilities, st.integers(min_value=1, max_value=6))
def test_postprocess_never_emits_adjacent_pqfs(probs, separation):
    labels = postprocess(probs, max_separation=separation)
    assert not np.any((labels[1:] == 1) & (labels[:-1] == 1))


@settings(max_examples=200, deadline=None)
@given(probabilities, st.integers(min_value=2, max_value=6))
def test_postprocess_bounds_non_pqf_runs(probs, separation):
    labels = postprocess(probs, max_separation=separation)
    for start, end in runs_of(labels, 0):
        assert end - start + 1 <= separation


def literal_postprocess(probs, threshold, separation):
    """Frame-by-frame rendition of the two strategies, without run helpers."""
    n = len(probs)
    labels = [1 if p >= threshold else 0 for p in probs]

    i = 0
    while i < n:
        if labels[i] == 1:
            j = i
            while j + 1 < n and labels[j + 1] == 1:
                j += 1
            best = max(range(i, j + 1), key=lambda k: (probs[k], -k))
            for k in range(i, j + 1):
                labels[k] = 1 if k == best else 0
            i = j + 1
        else:
            i += 1

    changed = True
    while changed:
        changed = False
        i = 0
        while i < n:
            if labels[i] == 0:
                j = i
                while j + 1 < n and labels[j + 1] == 0:
                    j += 1
                if j - i + 1 > separation and j - i >= 2:
                    best = max(range(i + 1, j), key=lambda k: (probs[k], -k))
                    labels[best] = 1
                    changed = True
                    break
                i = j + 1
            else:
                i += 1
    return labels


@settings(max_examples=10000, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=12),
       st.integers(min_value=1, max_value=3))
def test_postprocess_matches_literal_rendition(probs, separation):
    expected = literal_postprocess(probs, 0.5, separation)
    assert postprocess(probs, max_separation=separation).tolist() == expected


@settings(max_examples=100, deadline=None)
@given(probabilities)
def test_postprocess_keeps_isolated_confident_frames(probs):
    values = np.array(probs)
    labels = postprocess(values, max_separation=3)
    above = values >= 0.5
    for n in np.flatnonzero(above):
        isolated = (n == 0 or not above[n - 1]) and (n == len(values) - 1 or not above[n + 1])
        if isolated:
            assert labels[n] == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=20, max_value=50), min_size=3, max_size=30))
def test_ground_truth_labels_match_brute_force(values):
    expected = [0] + [
        int(values[n] > values[n - 1] and values[n] > values[n + 1])
        for n in range(1, len(values) - 1)
    ] + [0]
    assert ground_truth_labels(np.array(values)).tolist() == expected


@pytest.mark.parametrize('values', [[30.0, 31.0], [30.0, float('inf'), 31.0]])
def test_ground_truth_labels_errors(values):
    with pytest.raises(DetectorError):
        ground_truth_labels(np.array(values))


def test_detector_metrics():
    metrics = detector_metrics([1, 0, 1, 0], [1, 1, 0, 0])
    assert (metrics.precision, metrics.recall, metrics.f1) == (0.5, 0.5, 0.5)
    assert (metrics.true_positives, metrics.false_positives, metrics.false_negatives) == (1, 1, 1)


def test_detector_metrics_undefined_values_carry_notes():
    metrics = detector_metrics([0, 0, 0], [0, 1, 0])
    assert metrics.precision is None
    assert metrics.recall == 0.0
    assert metrics.notes
    nothing = detector_metrics([0, 0], [0, 0])
    assert nothing.f1 is None
    assert len(nothing.notes) == 3


def test_detector_metrics_length_mismatch():
    with pytest.raises(DetectorError):
        detector_metrics([0, 1], [0, 1, 0])


def test_annotation_file_round_trip(tmp_path):
    annotation = PqfAnnotation(probs=[0.1234567, 0.9, 0.0], labels=[0, 1, 0])
    path = tmp_path / 'labels.csv'
    write_annotation(annotation, str(path))
    loaded = load_annotation(str(path))
    assert loaded.labels.tolist() == [0, 1, 0]
    np.testing.assert_allclose(loaded.probs, [0.123457, 0.9, 0.0])
    assert loaded.pqf_indices == [1]


@pytest.mark.parametrize('body', [
    'frame_index,prob,label\n1,0.5,1\n',
    'frame_index,prob,label\n0,0.5,2\n',
    'frame_index,prob,label\n0,1.5,1\n',
    'frame_index,prob,label\n0;0.5;1\n',
])
def test_bad_annotation_files(tmp_path, body):
    path = tmp_path / 'labels.csv'
    path.write_text(body)
    with pytest.raises(DetectorError):
        load_annotation(str(path))


def test_annotation_shape_mismatch():
    with pytest.raises(DetectorError):
        PqfAnnotation(probs=[0.1, 0.2], labels=[0])


def test_make_windows_pads_with_last_frame():
    features = np.arange(10 * 3, dtype=np.float64).reshape(10, 3)
    windows, mask = make_windows(features, window=8)
    assert windows.shape == (2, 8, 3)
    assert mask.sum() == 10
    np.testing.assert_array_equal(windows[1, 2:], np.repeat(features[-1:], 6, axis=0))


def test_training_windows_cover_the_tail():
    features = np.zeros((10, 2))
    labels = np.arange(10)
    windows, window_labels, masks = training_windows(features, labels, window=8, stride=3)
    assert windows.shape == (2, 8, 2)
    assert window_labels[-1].tolist() == list(range(2, 10))
    assert masks.all()


def test_training_windows_of_a_short_clip():
    windows, window_labels, masks = training_windows(np.ones((5, 2)), np.ones(5), window=8)
    assert windows.shape == (1, 8, 2)
    assert masks.sum() == 5
    assert window_labels[0, 5:].tolist() == [0.0, 0.0, 0.0]


def test_detector_forward_shapes_and_range(rng):
    net = PqfDetectorNet(input_dim=4, hidden_units=6)
    probs = detector_forward(net, rng.normal(size=(8, 4)), window=8)
    assert probs.shape == (8,)
    assert ((probs > 0) & (probs < 1)).all()


@pytest.mark.parametrize('shape', [(7, 4), (8, 5)])
def test_detector_forward_rejects_bad_windows(rng, shape):
    with pytest.raises(DetectorError):
        detector_forward(PqfDetectorNet(input_dim=4, hidden_units=6), rng.normal(size=shape))


def test_detector_forward_rejects_non_finite(rng):
    values = rng.normal(size=(8, 4))
    values[3, 1] = np.nan
    with pytest.raises(DetectorError, match='non-finite'):
        detector_forward(PqfDetectorNet(input_dim=4, hidden_units=6), values)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def unrolled_lstm(cell, steps):
    """Gate-by-gate recurrence with torch's i, f, g, o row layout."""
    w_ih = cell.weight_ih_l0.detach().double().numpy()
    w_hh = cell.weight_hh_l0.detach().double().numpy()
    bias = (cell.bias_ih_l0 + cell.bias_hh_l0).detach().double().numpy()
    h = np.zeros(cell.hidden_size)
    c = np.zeros(cell.hidden_size)
    outputs = []
    for x in steps:
        i, f, g, o = np.split(w_ih @ x + w_hh @ h + bias, 4)
        c = sigmoid(f) * c + sigmoid(i) * np.tanh(g)
        h = sigmoid(o) * np.tanh(c)
        outputs.append(h)
    return np.array(outputs)


def test_detector_forward_matches_unrolled_recurrence(rng):
    net = PqfDetectorNet(input_dim=5, hidden_units=7)
    window = rng.normal(size=(8, 5))
    forward = unrolled_lstm(net.forward_cell, window)
    backward = unrolled_lstm(net.backward_cell, window[::-1])[::-1]
    weight = net.head.weight.detach().double().numpy().ravel()
    bias = net.head.bias.item()
    expected = sigmoid(np.concatenate([forward, backward], axis=1) @ weight + bias)

    np.testing.assert_allclose(detector_forward(net, window), expected, atol=1e-5)


def test_detector_with_zero_parameters_is_undecided(rng):
    net = PqfDetectorNet(input_dim=4, hidden_units=6)
    with torch.no_grad():
        for parameter in net.parameters():
            parameter.zero_()
    np.testing.assert_array_equal(detector_forward(net, rng.normal(size=(8, 4))), np.full(8, 0.5))


def test_swapped_directions_reverses_time(rng):
    net = PqfDetectorNet(input_dim=4, hidden_units=6)
    x = torch.as_tensor(rng.normal(size=(1, 8, 4)), dtype=torch.float32)
    with torch.no_grad():
        expected = torch.flip(net(x), dims=[1])
        actual = net.swapped_directions()(torch.flip(x, dims=[1]))
    torch.testing.assert_close(actual, expected)


def test_sequence_probabilities_trim_padding(rng):
    config = tiny_config()
    detector = PqfDetector(net=PqfDetectorNet(4, 6),
                           normalizer=FeatureNormalizer(mean=np.zeros(4), std=np.ones(4)),
                           config=config)
    assert sequence_probabilities(detector, rng.normal(size=(10, 4))).shape == (10,)


def test_detect_from_features_without_postprocessing(rng):
    config = tiny_config(postprocess=False)
    detector = PqfDetector(net=PqfDetectorNet(4, 6),
                           normalizer=FeatureNormalizer(mean=np.zeros(4), std=np.ones(4)),
                           config=config)
    annotation = detect_from_features(rng.normal(size=(9, 4)), detector)
    np.testing.assert_array_equal(annotation.labels, annotation.probs >= config.threshold)


def test_training_records_one_loss_per_epoch(rng):
    trainer = Detector_Trainer(tiny_config(), seed=5)
    detector = trainer.train(toy_sequences(rng))
    assert len(trainer.loss_trace) == 3
    assert np.isfinite(trainer.loss_trace).all()
    assert detector.normalizer.mean.shape == (4,)


def test_training_is_reproducible(rng):
    sequences = toy_sequences(rng)
    first = Detector_Trainer(tiny_config(), seed=5)
    second = Detector_Trainer(tiny_config(), seed=5)
    first.train(sequences)
    second.train(sequences)
    assert first.loss_trace == second.loss_trace


def test_training_needs_data():
    with pytest.raises(TrainingError):
        Detector_Trainer(tiny_config()).train([])


def test_training_rejects_label_mismatch(rng):
    features, labels = toy_sequences(rng, clips=1)[0]
    with pytest.raises(DetectorError):
        Detector_Trainer(tiny_config()).train([(features, labels[:-1])])


@pytest.mark.slow
def test_detector_learns_a_separable_signal(rng):
    detector = train_detector(toy_sequences(rng, clips=6), tiny_config(epochs=60), seed=1)
    features, labels = toy_sequences(np.random.default_rng(99), clips=1)[0]
    annotation = detect_from_features(features, detector)
    assert detector_metrics(annotation, labels).f1 >= 0.9


def test_detector_checkpoint_round_trip(tmp_path, rng):
    detector = train_detector(toy_sequences(rng), tiny_config(qp_tag=37), seed=2)
    path = tmp_path / 'detector.ckpt'
    save_detector(detector, str(path), seed=2)

    loaded = load_detector(str(path), expected=tiny_config())
    features = rng.normal(size=(12, 4))
    np.testing.assert_array_equal(detect_from_features(features, loaded).probs,
                                  detect_from_features(features, detector).probs)
    assert loaded.config.qp_tag == 37


def test_detector_checkpoint_architecture_mismatch(tmp_path, rng):
    detector = train_detector(toy_sequences(rng), tiny_config(), seed=2)
    path = tmp_path / 'detector.ckpt'
    save_detector(detector, str(path))
    with pytest.raises(CheckpointError, match='hidden_units'):
        load_detector(str(path), expected=tiny_config(hidden_units=12))


def test_detect_runs_the_full_feature_path(rng):
    seq = Sequence.from_luma(rng.random((6, 24, 24)))
    meta = [FrameMetadata(bits=500 + 100 * (n % 2), qp=32) for n in range(6)]
    detector = PqfDetector(net=PqfDetectorNet(38, 6),
                           normalizer=FeatureNormalizer(mean=np.zeros(38), std=np.ones(38)),
                           config=DetectorConfig(hidden_units=6))
    annotation = detect(seq, meta, detector)
    assert len(annotation) == 6
    assert not np.any((annotation.labels[1:] == 1) & (annotation.labels[:-1] == 1))


@pytest.mark.slow
def test_detector_finds_pqfs_in_held_out_synthetic_clips():
    corpus = make_corpus(clips=20, frames=30, seed=200)
    labelled = [(extract_features(clip.comp, clip.meta), clip.labels) for clip in corpus]
    detector = train_detector(labelled[:16], DetectorConfig(hidden_units=32, learning_rate=1e-3, epochs=40),
                              seed=4)
    scores = [detector_metrics(detect_from_features(features, detector), labels).f1
              for features, labels in labelled[16:]]
    assert np.mean(scores) >= 0.9
