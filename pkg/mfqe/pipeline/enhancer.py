"""
Sequence enhancement: detect PQFs, pair each frame with its references and
run the matching MF-CNN over it.
"""

import logging
from typing import Any, List, Optional, Sequence as SequenceType, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..config import PipelineConfig, config_to_dict
from ..detection import (
    DetectorError, PqfAnnotation, PqfDetector, detect, ground_truth_labels, load_detector,
)
from ..enhancement import MfCnn
from ..metrics import PSNR, quality_curve
from ..training import CheckpointError, load_mfcnn
from ..validation import Input_Validator
from ..video import Sequence, nearest_pqfs, neighbor_references

logger = logging.getLogger(__name__)

PQF_REFERENCES = 'pqf'
NEIGHBOR_REFERENCES = 'neighbor'
DETECTOR_LABELS = 'detector'
GROUND_TRUTH_LABELS = 'ground_truth'


def _tile_spans(length: int, size: int, overlap: int) -> List[Tuple[int, int, int, int]]:
    """Split ``[0, length)`` into (core_start, core_stop, tile_start, tile_stop) spans.

    Cores partition the axis; each tile extends its core by ``overlap`` on
    both sides where the frame allows.
    """
    core = size - 2 * overlap
    spans = []
    for start in range(0, length, core):
        stop = min(start + core, length)
        spans.append((start, stop, max(0, start - overlap), min(length, stop + overlap)))
    return spans


class Sequence_Enhancer:
    """
    Enhances a compressed sequence frame by frame.

    Provides methods to:
    - Annotate a sequence with the detector or with ground-truth labels
    - Choose the two reference frames of every frame
    - Run the non-PQF or PQF MF-CNN on one frame, tiling very large frames
    """

    def __init__(self, non_pqf_model: MfCnn, pqf_model: MfCnn,
                 detector: Optional[PqfDetector] = None,
                 config: Optional[PipelineConfig] = None, extractor=None):
        """Initialize the enhancer.

        Args:
            non_pqf_model: MF-CNN used for non-PQF targets
            pqf_model: MF-CNN used for PQF targets
            detector: PQF detector; required unless annotations are supplied
            config: Pipeline settings
            extractor: Optional pixel-feature extractor override for detection

        Raises:
            CheckpointError: If the two models were built with different motion settings
        """
        self.config = config or PipelineConfig()
        if config_to_dict(non_pqf_model.mc.config) != config_to_dict(pqf_model.mc.config):
            raise CheckpointError("Non-PQF and PQF models use different MC-subnet architectures")
        self.non_pqf_model = non_pqf_model.eval()
        self.pqf_model = pqf_model.eval()
        self.detector = detector
        self.extractor = extractor
        self.device = torch.device(self.config.device)
        self.non_pqf_model.to(self.device)
        self.pqf_model.to(self.device)
        self.validator = Input_Validator()

    def annotate(self, comp: Sequence, meta: Optional[SequenceType[Any]] = None,
                 raw: Optional[Sequence] = None) -> PqfAnnotation:
        """Label every frame according to ``config.label_source``.

        Raises:
            DetectorError: If the chosen label source lacks its inputs
        """
        if self.config.label_source == GROUND_TRUTH_LABELS:
            if raw is None:
                raise DetectorError("Ground-truth labels need the raw sequence")
            self.validator.require_aligned(raw, comp)
            return PqfAnnotation.from_labels(ground_truth_labels(quality_curve(raw, comp, PSNR)))

        if self.detector is None or meta is None:
            raise DetectorError("Detection needs a detector checkpoint and frame metadata")
        return detect(comp, meta, self.detector, extractor=self.extractor)

    def references(self, annotation: PqfAnnotation) -> List[Optional[Tuple[int, int]]]:
        """Reference frame pair of every frame, or None when a frame has none."""
        length = len(annotation)
        if self.config.reference_mode == NEIGHBOR_REFERENCES:
            return [neighbor_references(length, n) for n in range(length)]
        return [nearest_pqfs(annotation, n) for n in range(length)]

    def _padded(self, model: MfCnn, planes: SequenceType[np.ndarray]) -> Tuple[List[torch.Tensor], int, int]:
        height, width = planes[0].shape
        multiple = model.mc.required_multiple
        pad_h = -height % multiple
        pad_w = -width % multiple
        tensors = []
        for plane in planes:
            tensor = torch.as_tensor(plane, dtype=torch.float32, device=self.device).reshape(1, 1, height, width)
            if pad_h or pad_w:
                tensor = F.pad(tensor, (0, pad_w, 0, pad_h), mode='replicate')
            tensors.append(tensor)
        return tensors, height, width

    def _run(self, model: MfCnn, target: np.ndarray, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
        # Returns the float32 residual predicted for one (sub)frame
        (t_np, t_p1, t_p2), height, width = self._padded(model, (target, p1, p2))
        with torch.no_grad():
            enhanced = model(t_np, t_p1, t_p2).enhanced
        residual = (enhanced - t_np)[0, 0, :height, :width]
        return residual.double().cpu().numpy()

    def enhance_frame(self, model: MfCnn, target: np.ndarray, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
        """Enhance one luma plane given its two reference planes.

        Returns:
            Enhanced float64 luma clamped to [0, 1]
        """
        height, width = target.shape
        config = self.config
        if height * width <= config.tile_threshold_pixels:
            residual = self._run(model, target, p1, p2)
        else:
            residual = np.zeros_like(target, dtype=np.float64)
            rows = _tile_spans(height, config.tile_size, config.tile_overlap)
            cols = _tile_spans(width, config.tile_size, config.tile_overlap)
            logger.debug("Tiling %dx%d frame into %d tiles", width, height, len(rows) * len(cols))
            for y0, y1, ty0, ty1 in rows:
                for x0, x1, tx0, tx1 in cols:
                    window = (slice(ty0, ty1), slice(tx0, tx1))
                    tile = self._run(model, target[window], p1[window], p2[window])
                    residual[y0:y1, x0:x1] = tile[y0 - ty0:y1 - ty0, x0 - tx0:x1 - tx0]
        return np.clip(np.asarray(target, dtype=np.float64) + residual, 0.0, 1.0)

    def enhance(self, comp: Sequence, annotation: PqfAnnotation) -> Sequence:
        """
        Enhance every frame of a compressed sequence.

        Args:
            comp: Compressed sequence
            annotation: PQF labels of ``comp``

        Returns:
            Sequence with enhanced luma and the input chroma

        Raises:
            AlignmentError: If the annotation does not fit the sequence
        """
        self.validator.require_labels(annotation.labels, len(comp))
        pairs = self.references(annotation)
        if all(pair is None for pair in pairs):
            logger.warning("No PQF detected in %d frames; returning the sequence unmodified", len(comp))
            return comp.with_luma(comp.luma_stack())
        if self.config.reference_mode == PQF_REFERENCES and len(annotation.pqf_indices) == 1:
            logger.warning("Only one PQF detected; every frame uses it for both references")

        stack = comp.luma_stack()
        enhanced = np.empty_like(stack)
        for n, pair in enumerate(pairs):
            if pair is None:
                enhanced[n] = stack[n]
                continue
            p1, p2 = pair
            model = self.pqf_model if annotation.labels[n] == 1 else self.non_pqf_model
            enhanced[n] = self.enhance_frame(model, stack[n], stack[p1], stack[p2])
            logger.debug("Frame %d enhanced with references (%d, %d)", n, p1, p2)

        logger.info("Enhanced %d frames (%d PQFs)", len(comp), len(annotation.pqf_indices))
        return comp.with_luma(enhanced)


Loadable = Union[str, Any]


def _as_detector(detector: Optional[Loadable]) -> Optional[PqfDetector]:
    if detector is None or isinstance(detector, PqfDetector):
        return detector
    return load_detector(detector)


def _as_mfcnn(model: Loadable) -> MfCnn:
    if isinstance(model, MfCnn):
        return model
    if hasattr(model, 'model'):
        return model.model
    return load_mfcnn(model)[0]


def enhance_sequence(comp: Sequence, meta: Optional[SequenceType[Any]], detector_ckpt: Optional[Loadable],
                     mfcnn_np_ckpt: Loadable, mfcnn_pqf_ckpt: Loadable,
                     config: Optional[PipelineConfig] = None,
                     annotation: Optional[PqfAnnotation] = None,
                     raw: Optional[Sequence] = None) -> Tuple[Sequence, PqfAnnotation]:
    """
    Detect PQFs and enhance every frame of a compressed sequence.

    Checkpoints may be paths or already loaded objects.

    Args:
        comp: Compressed sequence
        meta: Per-frame metadata aligned with ``comp``
        detector_ckpt: Detector checkpoint (unused when ``annotation`` is given)
        mfcnn_np_ckpt: Non-PQF MF-CNN checkpoint
        mfcnn_pqf_ckpt: PQF MF-CNN checkpoint
        config: Pipeline settings
        annotation: Precomputed PQF annotation
        raw: Raw sequence, needed for ground-truth labels

    Returns:
        Tuple of (enhanced sequence, annotation used)

    Raises:
        CheckpointError: On incompatible or corrupt checkpoints
    """
    enhancer = Sequence_Enhancer(_as_mfcnn(mfcnn_np_ckpt), _as_mfcnn(mfcnn_pqf_ckpt),
                                 detector=_as_detector(detector_ckpt) if annotation is None else None,
                                 config=config)
    if annotation is None:
        annotation = enhancer.annotate(comp, meta, raw=raw)
    return enhancer.enhance(comp, annotation), annotation
