"""Closed-form parameter and operation counts of the MF-CNN."""

from typing import Dict, List, Tuple

from torch import nn

from ..config import McConfig, QeConfig

MOTION_LAYERS = 5
# Trainable scalars of PReLU (single slope) and of a BatchNorm channel
PRELU_PARAMETERS = 1
BN_PARAMETERS_PER_CHANNEL = 2

REFERENCE_PARAMETER_COUNT = 255_422


def conv_parameter_count(in_channels: int, out_channels: int, kernel_size: int, bias: bool = True) -> int:
    """Weights plus biases of one square convolution."""
    return in_channels * out_channels * kernel_size * kernel_size + (out_channels if bias else 0)


def _motion_layers(mc: McConfig, in_channels: int) -> List[Tuple[int, int]]:
    widths = [in_channels] + [mc.filters] * (MOTION_LAYERS - 1) + [2]
    return list(zip(widths[:-1], widths[1:]))


def mc_parameter_count(mc: McConfig) -> int:
    total = 0
    for in_channels in (2, 5, 5):
        for cin, cout in _motion_layers(mc, in_channels):
            total += conv_parameter_count(cin, cout, mc.kernel_size)
        total += (MOTION_LAYERS - 1) * PRELU_PARAMETERS
    return total


def _qe_layers(qe: QeConfig) -> Tuple[List[int], List[Tuple[int, int]], int]:
    kernels = list(qe.kernel_sizes) if qe.multiscale else [5] * len(qe.kernel_sizes)
    extraction = 3 * len(kernels) * qe.filters
    if qe.dense:
        outputs = [qe.growth] * qe.dense_layers
        inputs = [extraction] + [qe.growth * k for k in range(1, qe.dense_layers)]
        recon_in = qe.growth * qe.dense_layers
    else:
        outputs = [qe.growth] * qe.dense_layers
        if qe.dense_layers > 1:
            outputs[1] = qe.no_dense_c11_filters
        inputs = [extraction] + outputs[:-1]
        recon_in = outputs[-1]
    return kernels, list(zip(inputs, outputs)), recon_in


def qe_parameter_count(qe: QeConfig) -> int:
    kernels, dense, recon_in = _qe_layers(qe)
    total = 0
    for kernel in kernels:
        total += 3 * (conv_parameter_count(1, qe.filters, kernel) + PRELU_PARAMETERS)
    for cin, cout in dense:
        total += conv_parameter_count(cin, cout, 3) + PRELU_PARAMETERS + BN_PARAMETERS_PER_CHANNEL * cout
    total += conv_parameter_count(recon_in, 1, qe.reconstruction_kernel) + BN_PARAMETERS_PER_CHANNEL
    return total


def parameter_count(mc_config: McConfig = None, qe_config: QeConfig = None) -> int:
    """Trainable scalars of the MF-CNN built from these configs.

    The MC-subnet's weights are shared by both reference frames, so they
    count once.
    """
    return mc_parameter_count(mc_config or McConfig()) + qe_parameter_count(qe_config or QeConfig())


def module_parameter_count(module: nn.Module) -> int:
    """Trainable scalars of an instantiated module."""
    return sum(p.numel() for p in module.parameters() if p.requires_grad)


def _conv_ops(cin: int, cout: int, kernel: int, pixels: int) -> Tuple[int, int]:
    # Per output value: k*k*cin products, k*k*cin - 1 sums plus the bias
    macs = cin * kernel * kernel
    return pixels * cout * macs, pixels * cout * macs


def operation_count(mc_config: McConfig = None, qe_config: QeConfig = None,
                    patch: int = 64) -> Dict[str, int]:
    """
    Multiplications and additions to enhance one ``patch`` x ``patch`` block.

    Counts every convolution (both MC passes), PReLU and inference-time
    batch normalization as one multiply and one add per value, each bilinear
    warp as 8 multiplies and 3 adds per pixel, and the final residual add.
    """
    mc = mc_config or McConfig()
    qe = qe_config or QeConfig()
    pixels = patch * patch
    mults = adds = 0

    def add(m: int, a: int) -> None:
        nonlocal mults, adds
        mults += m
        adds += a

    stacks = ((2, mc.coarse_strides), (5, mc.fine_strides), (5, mc.pixel_strides))
    for _ in range(2):
        for in_channels, strides in stacks:
            side = patch
            for index, (cin, cout) in enumerate(_motion_layers(mc, in_channels)):
                side = -(-side // strides[index])
                add(*_conv_ops(cin, cout, mc.kernel_size, side * side))
                if index < MOTION_LAYERS - 1:
                    add(side * side * cout, 0)
        # Three warps per pass, each 8 products and 3 sums per pixel
        add(3 * 8 * pixels, 3 * 3 * pixels)

    kernels, dense, recon_in = _qe_layers(qe)
    for kernel in kernels:
        add(*(3 * v for v in _conv_ops(1, qe.filters, kernel, pixels)))
        add(3 * pixels * qe.filters, 0)
    for cin, cout in dense:
        add(*_conv_ops(cin, cout, 3, pixels))
        add(2 * pixels * cout, pixels * cout)
    add(*_conv_ops(recon_in, 1, qe.reconstruction_kernel, pixels))
    add(pixels, 2 * pixels)

    return {'multiplications': mults, 'additions': adds}
