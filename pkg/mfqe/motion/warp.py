"""Bilinear backward warping and motion-field helpers."""

import logging
import os
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import ValidationFailure
from ..validation import AlignmentError
from ..video import Frame

logger = logging.getLogger(__name__)


class MotionError(ValidationFailure):
    """Raised on malformed motion fields or frame sizes the MC-subnet cannot take."""
    pass


def warp_tensor(frame: torch.Tensor, mv: torch.Tensor) -> torch.Tensor:
    """
    Sample ``frame`` at (x + mv_x, y + mv_y) with clamp-to-edge bilinear weights.

    Differentiable in both arguments. The integer part of each sample
    position is treated as a constant, so at integer displacements the
    gradient with respect to ``mv`` is the right-hand derivative. A zero
    field reproduces the input exactly.

    Args:
        frame: (B, C, H, W)
        mv: (B, 2, H, W) displacement in pixels, channel 0 horizontal

    Returns:
        (B, C, H, W) warped frame
    """
    if frame.dim() != 4 or mv.dim() != 4 or mv.shape[1] != 2:
        raise MotionError(f"Expected (B, C, H, W) frame and (B, 2, H, W) motion, got {tuple(frame.shape)} and {tuple(mv.shape)}")
    if frame.shape[0] != mv.shape[0] or frame.shape[2:] != mv.shape[2:]:
        raise AlignmentError(f"Frame {tuple(frame.shape)} and motion {tuple(mv.shape)} differ in size")

    batch, channels, height, width = frame.shape
    mv = mv.to(frame.dtype)
    grid_y, grid_x = torch.meshgrid(
        torch.arange(height, dtype=frame.dtype, device=frame.device),
        torch.arange(width, dtype=frame.dtype, device=frame.device),
        indexing='ij',
    )
    xs = torch.clamp(grid_x + mv[:, 0], 0, width - 1)
    ys = torch.clamp(grid_y + mv[:, 1], 0, height - 1)

    x0 = torch.floor(xs).detach()
    y0 = torch.floor(ys).detach()
    fx = (xs - x0).unsqueeze(1)
    fy = (ys - y0).unsqueeze(1)

    x0i = x0.long()
    y0i = y0.long()
    x1i = torch.clamp(x0i + 1, max=width - 1)
    y1i = torch.clamp(y0i + 1, max=height - 1)

    flat = frame.reshape(batch, channels, height * width)

    def gather(yi: torch.Tensor, xi: torch.Tensor) -> torch.Tensor:
        index = (yi * width + xi).reshape(batch, 1, height * width).expand(-1, channels, -1)
        return torch.gather(flat, 2, index).reshape(batch, channels, height, width)

    top = (1 - fx) * gather(y0i, x0i) + fx * gather(y0i, x1i)
    bottom = (1 - fx) * gather(y1i, x0i) + fx * gather(y1i, x1i)
    return (1 - fy) * top + fy * bottom


def upsample_motion(mv: torch.Tensor, scale: int) -> torch.Tensor:
    """Bilinearly enlarge a motion field by ``scale`` and rescale its values to match."""
    if scale == 1:
        return mv
    enlarged = F.interpolate(mv, scale_factor=scale, mode='bilinear', align_corners=False)
    return enlarged * scale


@dataclass
class MotionField:
    """Per-pixel displacement in pixels of the target resolution."""
    mv_x: np.ndarray
    mv_y: np.ndarray

    def __post_init__(self):
        self.mv_x = np.asarray(self.mv_x, dtype=np.float64)
        self.mv_y = np.asarray(self.mv_y, dtype=np.float64)
        if self.mv_x.shape != self.mv_y.shape:
            raise MotionError(f"Motion planes differ in shape: {self.mv_x.shape} vs {self.mv_y.shape}")

    @property
    def shape(self):
        return self.mv_x.shape

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.mv_x, self.mv_y)

    def to_tensor(self, dtype=torch.float64) -> torch.Tensor:
        return torch.as_tensor(np.stack([self.mv_x, self.mv_y]), dtype=dtype).unsqueeze(0)

    @classmethod
    def from_tensor(cls, mv: torch.Tensor) -> "MotionField":
        """Take the first field of a (B, 2, H, W) tensor."""
        values = mv.detach().cpu().double().numpy()[0]
        return cls(mv_x=values[0], mv_y=values[1])

    @classmethod
    def zeros(cls, height: int, width: int) -> "MotionField":
        return cls(mv_x=np.zeros((height, width)), mv_y=np.zeros((height, width)))

    def save(self, path: str) -> None:
        """Write both planes as little-endian float32, horizontal plane first."""
        np.stack([self.mv_x, self.mv_y]).astype('<f4').tofile(path)

    @classmethod
    def load(cls, path: str, width: int, height: int) -> "MotionField":
        if not os.path.exists(path):
            raise MotionError(f"Motion field file not found: {path}")
        data = np.fromfile(path, dtype='<f4')
        if data.size != 2 * width * height:
            raise MotionError(f"{path} holds {data.size} values, expected {2 * width * height}")
        planes = data.reshape(2, height, width).astype(np.float64)
        return cls(mv_x=planes[0], mv_y=planes[1])


def warp_bilinear(frame, mv: MotionField):
    """Warp a Frame by a MotionField; returns a new Frame.

    Raises:
        AlignmentError: If the frame and field differ in size
    """
    luma = np.asarray(frame.luma, dtype=np.float64)
    if luma.shape != mv.shape:
        raise AlignmentError(f"Frame {luma.shape} and motion field {mv.shape} differ in size")
    source = torch.as_tensor(luma).reshape(1, 1, *luma.shape)
    warped = warp_tensor(source, mv.to_tensor(torch.float64))
    return Frame(luma=warped[0, 0].numpy())
