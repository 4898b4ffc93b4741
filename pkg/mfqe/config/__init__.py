# Configuration management module

from .manager import (
    Config_Manager, ConfigurationError, VideoConfig, DetectorConfig, McConfig,
    QeConfig, TrainConfig, PipelineConfig, LoggingConfig, config_to_dict,
    config_from_dict, validate_train_config,
)

__all__ = [
    'Config_Manager', 'ConfigurationError', 'VideoConfig', 'DetectorConfig', 'McConfig',
    'QeConfig', 'TrainConfig', 'PipelineConfig', 'LoggingConfig', 'config_to_dict',
    'config_from_dict', 'validate_train_config',
]
