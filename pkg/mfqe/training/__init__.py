# MF-CNN training, losses and checkpoint module

from .checkpoint import (
    MAGIC, FORMAT_VERSION, DETECTOR_KIND, MFCNN_KIND, Checkpoint, CheckpointError,
    save_checkpoint, load_checkpoint, require_config_match,
)
from .losses import LossTerms, mc_loss, qe_loss, loss_terms, joint_loss
from .convergence import ConvergenceConfig, Convergence_Monitor
from .trainer import (
    NON_PQF_TARGET, PQF_TARGET, TraceRow, TrainResult, Mfcnn_Trainer, mfcnn_checkpoint,
    train_mfcnn, save_mfcnn, load_mfcnn, write_trace_csv, load_trace_csv,
)

__all__ = [
    'MAGIC', 'FORMAT_VERSION', 'DETECTOR_KIND', 'MFCNN_KIND', 'Checkpoint', 'CheckpointError',
    'save_checkpoint', 'load_checkpoint', 'require_config_match', 'LossTerms', 'mc_loss',
    'qe_loss', 'loss_terms', 'joint_loss', 'ConvergenceConfig', 'Convergence_Monitor',
    'NON_PQF_TARGET', 'PQF_TARGET', 'TraceRow', 'TrainResult', 'Mfcnn_Trainer',
    'mfcnn_checkpoint', 'train_mfcnn', 'save_mfcnn', 'load_mfcnn', 'write_trace_csv',
    'load_trace_csv',
]
