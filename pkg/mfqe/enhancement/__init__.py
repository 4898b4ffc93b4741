# Quality enhancement network module

from .network import (
    DenseLayer, ChannelTrace, QeSubnet, MfcnnOutput, MfCnn, qe_forward,
)
from .complexity import (
    REFERENCE_PARAMETER_COUNT, conv_parameter_count, mc_parameter_count, qe_parameter_count,
    parameter_count, module_parameter_count, operation_count,
)

__all__ = [
    'DenseLayer', 'ChannelTrace', 'QeSubnet', 'MfcnnOutput', 'MfCnn', 'qe_forward',
    'REFERENCE_PARAMETER_COUNT', 'conv_parameter_count', 'mc_parameter_count',
    'qe_parameter_count', 'parameter_count', 'module_parameter_count', 'operation_count',
]
