"""Bidirectional recurrent PQF detector: model, windowing, training and inference."""

import copy
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence as SequenceType, Tuple

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn
from torch.utils.data import DataLoader, TensorDataset

from ..config import DetectorConfig, config_from_dict, config_to_dict
from ..errors import TrainingError
from ..features import FeatureNormalizer, extract_features, fit_normalizer
from ..training.checkpoint import (
    DETECTOR_KIND, Checkpoint, CheckpointError, load_checkpoint, save_checkpoint,
)
from .annotation import DetectorError, PqfAnnotation
from .postprocess import postprocess

logger = logging.getLogger(__name__)


class PqfDetectorNet(nn.Module):
    """Forward and backward LSTM cells fused into a per-step sigmoid head."""

    def __init__(self, input_dim: int = 38, hidden_units: int = 128):
        super().__init__()
        self.input_dim = input_dim
        self.hidden_units = hidden_units
        self.forward_cell = nn.LSTM(input_dim, hidden_units, batch_first=True)
        self.backward_cell = nn.LSTM(input_dim, hidden_units, batch_first=True)
        self.head = nn.Linear(2 * hidden_units, 1)

    def logits(self, x: torch.Tensor) -> torch.Tensor:
        """Per-step logits for a (batch, steps, features) input."""
        forward_out, _ = self.forward_cell(x)
        backward_out, _ = self.backward_cell(torch.flip(x, dims=[1]))
        fused = torch.cat([forward_out, torch.flip(backward_out, dims=[1])], dim=-1)
        return self.head(fused).squeeze(-1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.logits(x))

    def swapped_directions(self) -> "PqfDetectorNet":
        """Copy with the two cells exchanged and the head halves to match.

        Running the copy on a time-reversed input yields the time-reversed
        output of this model.
        """
        twin = copy.deepcopy(self)
        twin.forward_cell.load_state_dict(self.backward_cell.state_dict())
        twin.backward_cell.load_state_dict(self.forward_cell.state_dict())
        h = self.hidden_units
        with torch.no_grad():
            weight = self.head.weight
            twin.head.weight.copy_(torch.cat([weight[:, h:], weight[:, :h]], dim=1))
        return twin


@dataclass
class PqfDetector:
    """A trained network together with its normalizer and decision settings."""
    net: PqfDetectorNet
    normalizer: FeatureNormalizer
    config: DetectorConfig = field(default_factory=DetectorConfig)


def make_windows(features: np.ndarray, window: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cut an (N, F) matrix into non-overlapping windows of ``window`` steps.

    The final partial window is right-padded by repeating the last frame;
    the returned mask marks the real positions.

    Returns:
        Tuple of (windows of shape (ceil(N / window), window, F), mask of
        shape (ceil(N / window), window))
    """
    matrix = np.asarray(features, dtype=np.float64)
    count = matrix.shape[0]
    if count == 0:
        raise DetectorError("Cannot window an empty feature matrix")

    total = math.ceil(count / window) * window
    padded = np.concatenate([matrix, np.repeat(matrix[-1:], total - count, axis=0)])
    mask = np.zeros(total, dtype=bool)
    mask[:count] = True
    return padded.reshape(-1, window, matrix.shape[1]), mask.reshape(-1, window)


def training_windows(features: np.ndarray, labels: np.ndarray, window: int = 8,
                     stride: int = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Overlapping windows with matching labels and validity masks."""
    matrix = np.asarray(features, dtype=np.float64)
    targets = np.asarray(labels, dtype=np.float64)
    count = matrix.shape[0]
    if count < window:
        padded, mask = make_windows(matrix, window)
        target = np.concatenate([targets, np.zeros(window - count)])
        return padded, target.reshape(1, window), mask

    starts = list(range(0, count - window + 1, stride))
    if starts[-1] != count - window:
        starts.append(count - window)
    windows = np.stack([matrix[s:s + window] for s in starts])
    window_labels = np.stack([targets[s:s + window] for s in starts])
    return windows, window_labels, np.ones_like(window_labels, dtype=bool)


def detector_forward(net: PqfDetectorNet, features: np.ndarray, window: int = 8) -> np.ndarray:
    """
    Probabilities for one window of normalized feature vectors.

    Raises:
        DetectorError: If the window has the wrong length or width, or
            holds non-finite values
    """
    values = np.asarray(features, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != window:
        raise DetectorError(f"Detector window must hold exactly {window} feature vectors, got shape {values.shape}")
    if values.shape[1] != net.input_dim:
        raise DetectorError(f"Feature vectors must have {net.input_dim} entries, got {values.shape[1]}")
    if not np.isfinite(values).all():
        raise DetectorError("Detector input contains non-finite features")

    net.eval()
    with torch.no_grad():
        probs = net(torch.as_tensor(values, dtype=torch.float32).unsqueeze(0))
    return probs.squeeze(0).double().numpy()


def sequence_probabilities(detector: PqfDetector, normalized: np.ndarray) -> np.ndarray:
    """Run the detector over a whole normalized feature matrix."""
    windows, mask = make_windows(normalized, detector.config.window)
    probs = np.concatenate([detector_forward(detector.net, w, detector.config.window) for w in windows])
    return probs[mask.ravel()]


def detect_from_features(features: np.ndarray, detector: PqfDetector) -> PqfAnnotation:
    """Normalize raw features, run the detector and post-process its output."""
    normalized = detector.normalizer.apply(features)
    probs = sequence_probabilities(detector, normalized)
    config = detector.config
    if config.postprocess:
        labels = postprocess(probs, config.threshold, config.max_separation)
    else:
        labels = (probs >= config.threshold).astype(np.int64)
    return PqfAnnotation(probs=probs, labels=labels)


def detect(seq, meta, detector: PqfDetector, extractor=None) -> PqfAnnotation:
    """Annotate every frame of a compressed sequence as PQF or non-PQF."""
    features = extract_features(seq, meta, extractor=extractor)
    annotation = detect_from_features(features, detector)
    logger.info("Detected %d PQFs in %d frames", len(annotation.pqf_indices), len(annotation))
    return annotation


class Detector_Trainer:
    """
    Trains a PqfDetectorNet with binary cross-entropy and Adam.

    Provides methods to:
    - Fit the feature normalizer on the training set
    - Train on overlapping label windows with a seeded shuffle
    - Record the per-epoch loss trace
    """

    def __init__(self, config: Optional[DetectorConfig] = None, seed: int = 0,
                 device: str = 'cpu'):
        self.config = config or DetectorConfig()
        self.seed = seed
        self.device = torch.device(device)
        self.loss_trace: List[float] = []

    def train(self, sequences: SequenceType[Tuple[np.ndarray, np.ndarray]]) -> PqfDetector:
        """
        Train on (raw feature matrix, ground-truth labels) pairs.

        Args:
            sequences: One (N, 38) feature matrix and 0/1 label vector per clip

        Returns:
            Trained PqfDetector

        Raises:
            TrainingError: On an empty dataset or a non-finite loss
        """
        if not sequences or all(len(f) == 0 for f, _ in sequences):
            raise TrainingError("Detector training needs at least one labeled sequence")

        config = self.config
        normalizer = fit_normalizer(np.vstack([f for f, _ in sequences]))

        window_sets, label_sets, mask_sets = [], [], []
        for features, labels in sequences:
            if len(features) != len(labels):
                raise DetectorError(f"Feature matrix has {len(features)} rows but {len(labels)} labels")
            windows, window_labels, masks = training_windows(
                normalizer.apply(features), labels, config.window, config.window_stride
            )
            window_sets.append(windows)
            label_sets.append(window_labels)
            mask_sets.append(masks)

        dataset = TensorDataset(
            torch.as_tensor(np.concatenate(window_sets), dtype=torch.float32),
            torch.as_tensor(np.concatenate(label_sets), dtype=torch.float32),
            torch.as_tensor(np.concatenate(mask_sets), dtype=torch.float32),
        )

        torch.manual_seed(self.seed)
        generator = torch.Generator().manual_seed(self.seed)
        loader = DataLoader(dataset, batch_size=config.batch_size, shuffle=True, generator=generator)

        net = PqfDetectorNet(config.input_dim, config.hidden_units).to(self.device)
        optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)

        logger.info("Training detector on %d windows for %d epochs", len(dataset), config.epochs)
        self.loss_trace = []
        net.train()
        for epoch in range(config.epochs):
            total, batches = 0.0, 0
            for windows, targets, masks in loader:
                windows, targets, masks = (t.to(self.device) for t in (windows, targets, masks))
                losses = F.binary_cross_entropy_with_logits(net.logits(windows), targets, reduction='none')
                loss = (losses * masks).sum() / masks.sum()
                if not torch.isfinite(loss):
                    raise TrainingError(f"Detector loss became non-finite at epoch {epoch}")
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                total += loss.item()
                batches += 1
            self.loss_trace.append(total / batches)
            logger.debug("Detector epoch %d loss %.6f", epoch, self.loss_trace[-1])

        net.eval()
        return PqfDetector(net=net.cpu(), normalizer=normalizer, config=config)


def train_detector(sequences, config: Optional[DetectorConfig] = None, seed: int = 0) -> PqfDetector:
    """Convenience wrapper around Detector_Trainer."""
    return Detector_Trainer(config, seed=seed).train(sequences)


def save_detector(detector: PqfDetector, path: str, seed: Optional[int] = None) -> None:
    """Write the detector, its normalizer, threshold and D to a checkpoint."""
    extra = {
        'normalizer': detector.normalizer.to_dict(),
        'threshold': detector.config.threshold,
        'max_separation': detector.config.max_separation,
        'qp_tag': detector.config.qp_tag,
        'seed': seed,
    }
    checkpoint = Checkpoint(kind=DETECTOR_KIND, config={'detector': config_to_dict(detector.config)},
                            state={'net': detector.net.state_dict()}, extra=extra)
    save_checkpoint(checkpoint, path)


def load_detector(path: str, expected: Optional[DetectorConfig] = None) -> PqfDetector:
    """Rebuild a PqfDetector from a checkpoint.

    Args:
        path: Checkpoint file
        expected: Architecture the caller requires (input_dim, hidden_units, window)
    """
    checkpoint = load_checkpoint(path, kind=DETECTOR_KIND)
    config = config_from_dict(DetectorConfig, checkpoint.config['detector'])
    if expected is not None:
        _require_same_architecture(config, expected, path)

    net = PqfDetectorNet(config.input_dim, config.hidden_units)
    net.load_state_dict(checkpoint.state['net'])
    net.eval()
    normalizer = FeatureNormalizer.from_dict(checkpoint.extra['normalizer'])
    return PqfDetector(net=net, normalizer=normalizer, config=config)


def _require_same_architecture(stored: DetectorConfig, expected: DetectorConfig, path: str) -> None:
    for name in ('input_dim', 'hidden_units', 'window'):
        if getattr(stored, name) != getattr(expected, name):
            raise CheckpointError(
                f"{path}: detector {name} is {getattr(stored, name)}, expected {getattr(expected, name)}"
            )
