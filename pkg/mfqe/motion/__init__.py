# Motion compensation module

from .warp import MotionError, MotionField, warp_tensor, warp_bilinear, upsample_motion
from .network import MotionStack, McOutput, McSubnet, estimate_motion

__all__ = [
    'MotionError', 'MotionField', 'warp_tensor', 'warp_bilinear', 'upsample_motion',
    'MotionStack', 'McOutput', 'McSubnet', 'estimate_motion',
]
