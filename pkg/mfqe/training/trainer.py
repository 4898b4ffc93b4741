"""End-to-end MF-CNN training with the two-stage loss-weight schedule."""

import csv
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence as SequenceType, Tuple

import numpy as np
import torch
from torch.utils.data import DataLoader, TensorDataset

from ..config import (
    McConfig, QeConfig, TrainConfig, config_from_dict, config_to_dict, validate_train_config,
)
from ..enhancement import MfCnn
from ..errors import TrainingError
from ..motion import warp_tensor
from ..video import TrainingSample, split_by_target
from .checkpoint import MFCNN_KIND, Checkpoint, load_checkpoint, save_checkpoint
from .convergence import ConvergenceConfig, Convergence_Monitor
from .losses import loss_terms

logger = logging.getLogger(__name__)

NON_PQF_TARGET = 'non_pqf'
PQF_TARGET = 'pqf'
TRACE_FIELDS = ('step', 'stage', 'a', 'b', 'l_mc', 'l_qe', 'total', 'wall_time')


@dataclass
class TraceRow:
    """Losses of one optimizer step."""
    step: int
    stage: int
    a: float
    b: float
    l_mc: float
    l_qe: float
    total: float
    wall_time: float = 0.0


@dataclass
class TrainResult:
    """A trained MF-CNN plus its checkpoint and loss trace."""
    model: MfCnn
    checkpoint: Checkpoint
    trace: List[TraceRow] = field(default_factory=list)
    stage_switch_step: Optional[int] = None


def _stack(samples: SequenceType[TrainingSample]) -> TensorDataset:
    planes = [np.stack([getattr(s, name) for s in samples])[:, None]
              for name in ('comp_np', 'comp_p1', 'comp_p2', 'raw_np', 'raw_p1', 'raw_p2')]
    return TensorDataset(*(torch.as_tensor(p, dtype=torch.float32) for p in planes))


def mfcnn_checkpoint(model: MfCnn, target: str, extra: Optional[Dict] = None) -> Checkpoint:
    """Snapshot a model into a Checkpoint (parameters are copied)."""
    state = {k: v.detach().cpu().clone() for k, v in model.state_dict().items()}
    config = {'mc': config_to_dict(model.mc.config), 'qe': config_to_dict(model.qe.config)}
    payload = {'target': target}
    payload.update(extra or {})
    return Checkpoint(kind=MFCNN_KIND, config=config, state={'mfcnn': state}, extra=payload)


class Mfcnn_Trainer:
    """
    Trains one MF-CNN (either the non-PQF or the PQF model).

    Stage 1 weights the motion loss heavily until the running-mean MC loss
    stops improving; stage 2 then weights the enhancement loss.
    """

    def __init__(self, config: Optional[TrainConfig] = None, mc_config: Optional[McConfig] = None,
                 qe_config: Optional[QeConfig] = None, device: str = 'cpu'):
        self.config = config or TrainConfig()
        validate_train_config(self.config)
        self.mc_config = mc_config or McConfig()
        self.qe_config = qe_config or QeConfig()
        self.device = torch.device(device)

    def _batches(self, dataset: TensorDataset, generator: torch.Generator) -> Iterator[Tuple[torch.Tensor, ...]]:
        loader = DataLoader(dataset, batch_size=self.config.batch_size, shuffle=True, generator=generator)
        while True:
            for batch in loader:
                yield tuple(t.to(self.device) for t in batch)

    def train(self, samples: SequenceType[TrainingSample], target: str = NON_PQF_TARGET) -> TrainResult:
        """
        Run both training stages on one target kind.

        Args:
            samples: Training samples for this model
            target: NON_PQF_TARGET or PQF_TARGET, stored in the checkpoint

        Returns:
            TrainResult with the model in inference mode

        Raises:
            TrainingError: On an empty dataset, or a non-finite loss (the
                error carries the last finite-loss checkpoint)
        """
        if not samples:
            raise TrainingError(f"No training samples for the {target} model")

        config = self.config
        torch.manual_seed(config.seed)
        generator = torch.Generator().manual_seed(config.seed)
        model = MfCnn(self.mc_config, self.qe_config).to(self.device)
        optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
        batches = self._batches(_stack(samples), generator)

        monitor = Convergence_Monitor(ConvergenceConfig(
            window=config.convergence_window, threshold=config.convergence_threshold,
            max_steps=config.stage1_max_steps,
        ))
        schedule = {1: (config.stage1_a, config.stage1_b), 2: (config.stage2_a, config.stage2_b)}

        logger.info("Training %s MF-CNN on %d samples (seed %d)", target, len(samples), config.seed)
        trace: List[TraceRow] = []
        stage, stage2_done, switch_step = 1, 0, None
        last_good = mfcnn_checkpoint(model, target, {'stage': stage, 'step': 0, 'seed': config.seed})
        started = time.perf_counter()
        model.train()

        step = 0
        while stage == 1 or stage2_done < config.stage2_steps:
            step += 1
            a, b = schedule[stage]
            comp_np, comp_p1, comp_p2, raw_np, raw_p1, raw_p2 = next(batches)

            out = model(comp_np, comp_p1, comp_p2)
            # Motion estimated on compressed frames is applied to the raw references
            warped_p1 = warp_tensor(raw_p1, out.previous.m_full)
            warped_p2 = warp_tensor(raw_p2, out.subsequent.m_full)
            terms = loss_terms(a, b, warped_p1, warped_p2, raw_np, out.enhanced)

            if not torch.isfinite(terms.total):
                raise TrainingError(
                    f"Non-finite loss at step {step} (stage {stage}); last finite checkpoint kept",
                    checkpoint=last_good,
                )

            optimizer.zero_grad()
            terms.total.backward()
            optimizer.step()

            row = TraceRow(step=step, stage=stage, a=a, b=b, l_mc=terms.l_mc.item(),
                           l_qe=terms.l_qe.item(), total=terms.total.item(),
                           wall_time=time.perf_counter() - started)
            trace.append(row)
            logger.debug("step %d stage %d l_mc %.6g l_qe %.6g", step, stage, row.l_mc, row.l_qe)
            last_good = mfcnn_checkpoint(model, target, {'stage': stage, 'step': step, 'seed': config.seed})

            if stage == 1:
                if monitor.update(row.l_mc):
                    stage, switch_step = 2, step
                    logger.info("MC loss settled (%s) at step %d; switching to a=%g, b=%g",
                                monitor.reason, step, *schedule[2])
            else:
                stage2_done += 1

        model.eval()
        checkpoint = mfcnn_checkpoint(model, target, {
            'stage': stage, 'step': step, 'seed': config.seed, 'stage_switch_step': switch_step,
            'training': config_to_dict(config),
        })
        return TrainResult(model=model.cpu(), checkpoint=checkpoint, trace=trace,
                           stage_switch_step=switch_step)


def train_mfcnn(samples: SequenceType[TrainingSample], config: Optional[TrainConfig] = None,
                mc_config: Optional[McConfig] = None, qe_config: Optional[QeConfig] = None,
                targets: SequenceType[str] = (NON_PQF_TARGET, PQF_TARGET),
                device: str = 'cpu') -> Dict[str, TrainResult]:
    """Train the non-PQF and PQF models independently on their own samples.

    Raises:
        TrainingError: If ``samples`` is empty or a requested target has none
    """
    if not samples:
        raise TrainingError("MF-CNN training needs at least one sample")

    non_pqf, pqf = split_by_target(samples)
    subsets = {NON_PQF_TARGET: non_pqf, PQF_TARGET: pqf}
    trainer = Mfcnn_Trainer(config, mc_config, qe_config, device=device)
    return {target: trainer.train(subsets[target], target) for target in targets}


def save_mfcnn(result_or_checkpoint, path: str) -> None:
    """Write a trained MF-CNN checkpoint."""
    checkpoint = getattr(result_or_checkpoint, 'checkpoint', result_or_checkpoint)
    save_checkpoint(checkpoint, path)


def load_mfcnn(path: str, mc_config: Optional[McConfig] = None,
               qe_config: Optional[QeConfig] = None) -> Tuple[MfCnn, Checkpoint]:
    """Rebuild an MF-CNN from a checkpoint.

    Args:
        path: Checkpoint file
        mc_config: Required MC architecture, if the caller has one
        qe_config: Required QE architecture, if the caller has one

    Raises:
        CheckpointError: On corrupt files or an architecture mismatch
    """
    expected = {}
    if mc_config is not None:
        expected['mc'] = config_to_dict(mc_config)
    if qe_config is not None:
        expected['qe'] = config_to_dict(qe_config)

    checkpoint = load_checkpoint(path, kind=MFCNN_KIND, expected_config=expected or None)
    model = MfCnn(config_from_dict(McConfig, checkpoint.config['mc'], 'mc'),
                  config_from_dict(QeConfig, checkpoint.config['qe'], 'qe'))
    model.load_state_dict(checkpoint.state['mfcnn'])
    model.eval()
    return model, checkpoint


def write_trace_csv(trace: SequenceType[TraceRow], path: str) -> None:
    """Write the loss trace, one step per row."""
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(TRACE_FIELDS)
        for row in trace:
            writer.writerow([getattr(row, name) for name in TRACE_FIELDS])


def load_trace_csv(path: str) -> List[TraceRow]:
    """Read a loss trace written by ``write_trace_csv``."""
    rows = []
    with open(path, 'r', encoding='utf-8', newline='') as handle:
        for record in csv.DictReader(handle):
            rows.append(TraceRow(
                step=int(record['step']), stage=int(record['stage']), a=float(record['a']),
                b=float(record['b']), l_mc=float(record['l_mc']), l_qe=float(record['l_qe']),
                total=float(record['total']), wall_time=float(record.get('wall_time') or 0.0),
            ))
    return rows
