"""MC, QE and joint MF-CNN losses."""

from dataclasses import dataclass
from typing import Union

import numpy as np
import torch
import torch.nn.functional as F

from ..validation import AlignmentError

FrameLike = Union[torch.Tensor, np.ndarray, object]


def _tensor(value) -> torch.Tensor:
    if isinstance(value, torch.Tensor):
        return value
    return torch.as_tensor(np.asarray(getattr(value, 'luma', value), dtype=np.float64))


def _mse(a, b) -> torch.Tensor:
    x, y = _tensor(a), _tensor(b)
    if x.shape != y.shape:
        raise AlignmentError(f"Loss inputs differ in shape: {tuple(x.shape)} vs {tuple(y.shape)}")
    return F.mse_loss(x, y.to(x.dtype))


def _result(value: torch.Tensor, *inputs):
    # Plain arrays in, plain float out
    if any(isinstance(v, torch.Tensor) for v in inputs):
        return value
    return float(value)


def mc_loss(warped_raw_ref: FrameLike, raw_target: FrameLike):
    """Mean squared error between a warped raw reference and the raw target."""
    return _result(_mse(warped_raw_ref, raw_target), warped_raw_ref, raw_target)


def qe_loss(f_en: FrameLike, raw_np: FrameLike):
    """Mean squared error between the enhanced frame and its raw source."""
    return _result(_mse(f_en, raw_np), f_en, raw_np)


@dataclass
class LossTerms:
    l_mc: torch.Tensor
    l_qe: torch.Tensor
    total: torch.Tensor


def loss_terms(a: float, b: float, warped_raw_p1, warped_raw_p2, raw_np, f_en) -> LossTerms:
    """Both weighted components of the joint loss as tensors."""
    l_mc = _mse(warped_raw_p1, raw_np) + _mse(warped_raw_p2, raw_np)
    l_qe = _mse(f_en, raw_np)
    return LossTerms(l_mc=l_mc, l_qe=l_qe, total=a * l_mc + b * l_qe)


def joint_loss(a: float, b: float, warped_raw_p1, warped_raw_p2, raw_np, f_en):
    """a * (MSE(p1) + MSE(p2)) + b * MSE(enhanced), all against the raw target."""
    terms = loss_terms(a, b, warped_raw_p1, warped_raw_p2, raw_np, f_en)
    return _result(terms.total, warped_raw_p1, warped_raw_p2, raw_np, f_en)
