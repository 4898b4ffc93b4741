"""
QE-subnet and the combined MF-CNN.

Three inputs (the target frame and two motion-compensated PQFs) each pass
through their own 3x3, 5x5 and 7x7 extraction convolutions (C1-C9). The 288
concatenated maps feed five densely connected layers (C10-C14), whose
outputs are concatenated for the reconstruction layer C15. The result is a
residual added to the target frame.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import torch
from torch import nn

from ..config import McConfig, QeConfig
from ..motion import McOutput, McSubnet
from ..validation import AlignmentError
from ..video import Frame

logger = logging.getLogger(__name__)

INPUT_FRAMES = 3


class DenseLayer(nn.Module):
    """Convolution, then PReLU, then batch normalization."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 momentum: float, padding_mode: str):
        super().__init__()
        self.conv = nn.Conv2d(in_channels, out_channels, kernel_size,
                              padding=kernel_size // 2, padding_mode=padding_mode)
        self.act = nn.PReLU()
        self.norm = nn.BatchNorm2d(out_channels, momentum=momentum)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.norm(self.act(self.conv(x)))


@dataclass
class ChannelTrace:
    """Channel widths seen during the last forward pass."""
    extraction: int = 0
    dense_inputs: List[int] = field(default_factory=list)
    reconstruction_input: int = 0


class QeSubnet(nn.Module):
    """Multi-scale extraction, dense mapping and residual reconstruction."""

    def __init__(self, config: QeConfig = None):
        super().__init__()
        self.config = config or QeConfig()
        c = self.config
        # BatchNorm2d blends new statistics with weight ``momentum``
        momentum = 1.0 - c.bn_decay

        kernels = tuple(c.kernel_sizes) if c.multiscale else (5,) * len(c.kernel_sizes)
        self.branches = nn.ModuleList()
        for _ in range(INPUT_FRAMES):
            branch = nn.ModuleList()
            for kernel in kernels:
                branch.append(nn.Sequential(
                    nn.Conv2d(1, c.filters, kernel, padding=kernel // 2, padding_mode=c.padding_mode),
                    nn.PReLU(),
                ))
            self.branches.append(branch)

        extraction = INPUT_FRAMES * len(kernels) * c.filters
        self.dense_layers = nn.ModuleList()
        for width_in, width_out in zip(self._dense_inputs(extraction), self._dense_outputs()):
            self.dense_layers.append(DenseLayer(width_in, width_out, 3, momentum, c.padding_mode))

        recon_in = c.growth * c.dense_layers if c.dense else self._dense_outputs()[-1]
        self.reconstruction = nn.Conv2d(recon_in, 1, c.reconstruction_kernel,
                                        padding=c.reconstruction_kernel // 2,
                                        padding_mode=c.padding_mode)
        self.reconstruction_norm = nn.BatchNorm2d(1, momentum=momentum)
        self.trace = ChannelTrace()

    def _dense_outputs(self) -> List[int]:
        c = self.config
        if c.dense:
            return [c.growth] * c.dense_layers
        outputs = [c.growth] * c.dense_layers
        if c.dense_layers > 1:
            outputs[1] = c.no_dense_c11_filters
        return outputs

    def _dense_inputs(self, extraction: int) -> List[int]:
        c = self.config
        if c.dense:
            return [extraction] + [c.growth * k for k in range(1, c.dense_layers)]
        return [extraction] + self._dense_outputs()[:-1]

    def forward(self, f_np: torch.Tensor, f_p1: torch.Tensor, f_p2: torch.Tensor) -> torch.Tensor:
        """
        Args:
            f_np: (B, 1, H, W) frame to enhance
            f_p1: (B, 1, H, W) compensated previous PQF
            f_p2: (B, 1, H, W) compensated subsequent PQF

        Returns:
            (B, 1, H, W) enhanced frame f_np + residual
        """
        if not (f_np.shape == f_p1.shape == f_p2.shape):
            raise AlignmentError(
                f"QE inputs differ in shape: {tuple(f_np.shape)}, {tuple(f_p1.shape)}, {tuple(f_p2.shape)}"
            )

        maps = []
        for frame, branch in zip((f_p1, f_np, f_p2), self.branches):
            maps.extend(layer(frame) for layer in branch)
        x = torch.cat(maps, dim=1)

        trace = ChannelTrace(extraction=x.shape[1])
        outputs = []
        for index, layer in enumerate(self.dense_layers):
            if self.config.dense and index > 0:
                layer_in = torch.cat(outputs, dim=1)
            elif index > 0:
                layer_in = outputs[-1]
            else:
                layer_in = x
            trace.dense_inputs.append(layer_in.shape[1])
            outputs.append(layer(layer_in))

        recon_in = torch.cat(outputs, dim=1) if self.config.dense else outputs[-1]
        trace.reconstruction_input = recon_in.shape[1]
        self.trace = trace

        residual = self.reconstruction_norm(self.reconstruction(recon_in))
        return f_np + residual

    def zero_residual(self) -> None:
        """Zero C15 and its normalization so the subnet returns its target unchanged."""
        with torch.no_grad():
            self.reconstruction.weight.zero_()
            self.reconstruction.bias.zero_()
            self.reconstruction_norm.weight.zero_()
            self.reconstruction_norm.bias.zero_()


@dataclass
class MfcnnOutput:
    enhanced: torch.Tensor
    previous: McOutput
    subsequent: McOutput


class MfCnn(nn.Module):
    """MC-subnet applied to both PQFs with shared weights, then the QE-subnet."""

    def __init__(self, mc_config: McConfig = None, qe_config: QeConfig = None):
        super().__init__()
        self.mc = McSubnet(mc_config)
        self.qe = QeSubnet(qe_config)

    def forward(self, f_np: torch.Tensor, f_p1: torch.Tensor, f_p2: torch.Tensor) -> MfcnnOutput:
        previous = self.mc(f_p1, f_np)
        subsequent = self.mc(f_p2, f_np)
        enhanced = self.qe(f_np, previous.compensated, subsequent.compensated)
        return MfcnnOutput(enhanced=enhanced, previous=previous, subsequent=subsequent)

    def make_identity(self) -> None:
        """Zero motion and zero residual: the network returns its target frame."""
        self.mc.zero_motion()
        self.qe.zero_residual()

    def configs(self) -> Dict[str, object]:
        return {'mc': self.mc.config, 'qe': self.qe.config}


def _as_batch(frame) -> torch.Tensor:
    luma = torch.as_tensor(frame.luma, dtype=torch.float32)
    return luma.reshape(1, 1, *luma.shape)


def qe_forward(model: QeSubnet, f_np, f_p1_comp, f_p2_comp):
    """Enhance one Frame given the two compensated PQF Frames (inference mode)."""
    target = _as_batch(f_np)
    model.eval()
    with torch.no_grad():
        enhanced = model(target, _as_batch(f_p1_comp), _as_batch(f_p2_comp))
    # Residual is added back at full precision
    residual = (enhanced - target)[0, 0].double().numpy()
    return Frame(luma=np.asarray(f_np.luma, dtype=np.float64) + residual)
