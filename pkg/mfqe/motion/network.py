"""
MC-subnet: coarse (x4), fine (x2) and pixel-wise motion estimation stacks.

Each stack is five 3x3 convolutions with PReLU after the first four and a
two-channel Tanh output scaled so that, once enlarged to full resolution,
every displacement stays within ``r_max`` pixels.
"""

import logging
from dataclasses import dataclass
from typing import Sequence as SequenceType, Tuple

import torch
from torch import nn

from ..config import McConfig
from ..validation import Input_Validator
from ..video import Frame
from .warp import MotionError, MotionField, upsample_motion, warp_tensor

logger = logging.getLogger(__name__)

STACK_LAYERS = 5
MOTION_CHANNELS = 2


class MotionStack(nn.Module):
    """Five-layer convolutional motion regressor at 1/scale resolution."""

    def __init__(self, in_channels: int, strides: SequenceType[int], filters: int = 24,
                 kernel_size: int = 3, r_max: float = 16.0, padding_mode: str = 'reflect'):
        super().__init__()
        if len(strides) != STACK_LAYERS:
            raise MotionError(f"A motion stack needs {STACK_LAYERS} strides, got {len(strides)}")

        self.scale = 1
        for stride in strides:
            self.scale *= stride
        self.bound = r_max / self.scale

        widths = [in_channels] + [filters] * (STACK_LAYERS - 1) + [MOTION_CHANNELS]
        layers = []
        for index, stride in enumerate(strides):
            layers.append(nn.Conv2d(widths[index], widths[index + 1], kernel_size, stride=stride,
                                    padding=kernel_size // 2, padding_mode=padding_mode))
            if index < STACK_LAYERS - 1:
                layers.append(nn.PReLU())
        self.body = nn.Sequential(*layers)
        self.output = nn.Tanh()

    @property
    def final_conv(self) -> nn.Conv2d:
        return self.body[-1]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.output(self.body(x)) * self.bound


@dataclass
class McOutput:
    """Full-resolution motion fields and the warped references of one MC pass."""
    m4: torch.Tensor
    m2: torch.Tensor
    m_full: torch.Tensor
    warped_x2: torch.Tensor
    compensated: torch.Tensor


class McSubnet(nn.Module):
    """Estimates motion from a reference frame to a target frame and warps the reference."""

    def __init__(self, config: McConfig = None):
        super().__init__()
        self.config = config or McConfig()
        c = self.config
        common = dict(filters=c.filters, kernel_size=c.kernel_size, r_max=c.r_max,
                      padding_mode=c.padding_mode)
        self.coarse = MotionStack(2, c.coarse_strides, **common)
        self.fine = MotionStack(3 + MOTION_CHANNELS, c.fine_strides, **common)
        self.pixel = MotionStack(3 + MOTION_CHANNELS, c.pixel_strides, **common)

    @property
    def required_multiple(self) -> int:
        return max(self.coarse.scale, self.fine.scale, self.pixel.scale)

    def check_size(self, height: int, width: int) -> None:
        multiple = self.required_multiple
        if height % multiple or width % multiple:
            raise MotionError(f"Frame size {width}x{height} must be a multiple of {multiple} for motion estimation")

    def _full(self, stack: MotionStack, x: torch.Tensor) -> torch.Tensor:
        mv = upsample_motion(stack(x), stack.scale)
        return torch.clamp(mv, -self.config.r_max, self.config.r_max)

    def forward(self, reference: torch.Tensor, target: torch.Tensor) -> McOutput:
        """
        Args:
            reference: (B, 1, H, W) PQF to compensate
            target: (B, 1, H, W) frame the PQF is aligned to

        Returns:
            McOutput with every field at full resolution in pixel units
        """
        self.check_size(target.shape[-2], target.shape[-1])

        m4 = self._full(self.coarse, torch.cat([reference, target], dim=1))
        warped_x4 = warp_tensor(reference, m4)

        m2 = self._full(self.fine, torch.cat([reference, target, warped_x4, m4], dim=1))
        warped_x2 = warp_tensor(reference, m2)

        m_full = self._full(self.pixel, torch.cat([reference, target, warped_x2, m2], dim=1))
        compensated = warp_tensor(reference, m_full)
        return McOutput(m4=m4, m2=m2, m_full=m_full, warped_x2=warped_x2, compensated=compensated)

    def zero_motion(self) -> None:
        """Zero every stack's final layer so all fields vanish and warps are identities."""
        with torch.no_grad():
            for stack in (self.coarse, self.fine, self.pixel):
                stack.final_conv.weight.zero_()
                stack.final_conv.bias.zero_()


def _frame_tensor(frame: Frame) -> torch.Tensor:
    return torch.as_tensor(frame.luma, dtype=torch.float32).reshape(1, 1, frame.height, frame.width)


def estimate_motion(model: McSubnet, f_target: Frame,
                    f_ref: Frame) -> Tuple[MotionField, MotionField, MotionField, Frame]:
    """Run the MC-subnet on one frame pair.

    Returns:
        Tuple of (m4, m2, m_full, warped_x2), fields at full resolution

    Raises:
        AlignmentError: If the frames differ in size
        MotionError: If the size is not a multiple of the coarse scale
    """
    Input_Validator().require_same_shape(f_target.luma, f_ref.luma)
    model.eval()
    with torch.no_grad():
        out = model(_frame_tensor(f_ref), _frame_tensor(f_target))
    warped = Frame(luma=out.warped_x2[0, 0].double().numpy())
    return (MotionField.from_tensor(out.m4), MotionField.from_tensor(out.m2),
            MotionField.from_tensor(out.m_full), warped)
