"""Configuration management for the multi-frame quality enhancement toolkit."""

import os
import yaml
from dataclasses import dataclass, fields, asdict
from typing import Optional, Dict, Any, Tuple, Type
import logging

from ..errors import ValidationFailure

logger = logging.getLogger(__name__)


@dataclass
class VideoConfig:
    """Raw video ingest and patch segmentation settings."""
    width: Optional[int] = None
    height: Optional[int] = None
    frame_rate: float = 30.0
    stride: int = 64
    augment: bool = False


@dataclass
class DetectorConfig:
    """BiLSTM PQF detector settings."""
    input_dim: int = 38
    hidden_units: int = 128
    window: int = 8
    window_stride: int = 1
    threshold: float = 0.5
    max_separation: int = 3
    postprocess: bool = True
    learning_rate: float = 1e-4
    batch_size: int = 32
    epochs: int = 60
    qp_tag: Optional[int] = None


@dataclass
class McConfig:
    """Motion compensation subnet settings.

    Every motion stack has five 3x3 convolutions; the strides pick the
    down-scaling of the stack (x4 coarse, x2 fine, x1 pixel-wise).
    """
    filters: int = 24
    kernel_size: int = 3
    coarse_strides: Tuple[int, ...] = (2, 2, 1, 1, 1)
    fine_strides: Tuple[int, ...] = (2, 1, 1, 1, 1)
    pixel_strides: Tuple[int, ...] = (1, 1, 1, 1, 1)
    r_max: float = 16.0
    padding_mode: str = "reflect"


@dataclass
class QeConfig:
    """Quality enhancement subnet settings."""
    filters: int = 32
    kernel_sizes: Tuple[int, ...] = (3, 5, 7)
    dense_layers: int = 5
    growth: int = 32
    reconstruction_kernel: int = 3
    bn_decay: float = 0.9
    dense: bool = True
    multiscale: bool = True
    no_dense_c11_filters: int = 50
    padding_mode: str = "reflect"


@dataclass
class TrainConfig:
    """Joint MF-CNN training settings (two-stage loss weights, Adam)."""
    stage1_a: float = 1.0
    stage1_b: float = 0.01
    stage2_a: float = 0.01
    stage2_b: float = 1.0
    learning_rate: float = 1e-4
    batch_size: int = 128
    patch: int = 64
    seed: int = 0
    convergence_window: int = 100
    convergence_threshold: float = 0.01
    stage1_max_steps: int = 200
    stage2_steps: int = 200


@dataclass
class PipelineConfig:
    """End-to-end enhancement settings."""
    reference_mode: str = "pqf"
    label_source: str = "detector"
    device: str = "cpu"
    tile_threshold_pixels: int = 1920 * 1080
    tile_size: int = 512
    tile_overlap: int = 16
    benchmark_repeats: int = 5
    benchmark_warmup: int = 2
    benchmark_frames: int = 4


@dataclass
class LoggingConfig:
    """Logging settings."""
    level: str = "INFO"


class ConfigurationError(ValidationFailure):
    """Raised when configuration is invalid or missing."""
    pass


_SECTIONS: Dict[str, Type] = {
    'video': VideoConfig,
    'detector': DetectorConfig,
    'mc': McConfig,
    'qe': QeConfig,
    'training': TrainConfig,
    'pipeline': PipelineConfig,
    'logging': LoggingConfig,
}

_LOG_LEVELS = {'DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'}


def build_section(section: str, cls: Type, data: Optional[Dict[str, Any]]):
    """Build one config dataclass from a mapping, rejecting unknown keys.

    Args:
        section: Section name used in error messages
        cls: Dataclass type to build
        data: Raw mapping from YAML (may be None)

    Returns:
        An instance of ``cls``

    Raises:
        ConfigurationError: On unknown keys or values of the wrong type
    """
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Section '{section}' must be a mapping")

    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigurationError(
            f"Unknown key(s) in '{section}' section: {', '.join(unknown)}"
        )

    values = {}
    for name, value in data.items():
        default = getattr(cls(), name)
        values[name] = _coerce(section, name, value, default)
    return cls(**values)


def _coerce(section: str, name: str, value: Any, default: Any) -> Any:
    """Coerce a YAML value to the type of the field default."""
    if value is None:
        if default is None:
            return None
        raise ConfigurationError(f"{section}.{name} may not be null")
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or int(value) != float(value):
                raise TypeError
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if isinstance(default, tuple):
            return tuple(int(v) for v in value)
        if isinstance(default, str):
            return str(value).strip()
        # Optional fields default to None: keep ints as ints
        if isinstance(value, (int, float, str)) and not isinstance(value, bool):
            return int(value)
    except (TypeError, ValueError):
        pass
    raise ConfigurationError(f"Invalid value for {section}.{name}: {value!r}")


class Config_Manager:
    """Manages run configuration from YAML files plus command-line overrides."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize the configuration manager.

        Args:
            config_path: Path to the configuration YAML file; None means
                built-in defaults only
        """
        self.config_path = config_path
        self._config_data: Optional[Dict[str, Any]] = None
        self._sections: Dict[str, Any] = {}

    def load_config(self) -> None:
        """Load configuration from the YAML file, or defaults if no path is set.

        Raises:
            ConfigurationError: If config file is missing or invalid
        """
        if self.config_path is None:
            self._config_data = {}
        else:
            if not os.path.exists(self.config_path):
                raise ConfigurationError(f"Configuration file not found: {self.config_path}")

            try:
                with open(self.config_path, 'r', encoding='utf-8') as file:
                    self._config_data = yaml.safe_load(file) or {}
            except yaml.YAMLError as e:
                raise ConfigurationError(f"Invalid YAML in configuration file: {e}")
            except OSError as e:
                raise ConfigurationError(f"Error reading configuration file: {e}")

            if not isinstance(self._config_data, dict):
                raise ConfigurationError("Configuration file must contain a mapping of sections")

        unknown = sorted(set(self._config_data) - set(_SECTIONS))
        if unknown:
            raise ConfigurationError(f"Unknown configuration section(s): {', '.join(unknown)}")

        self._load_all()
        logger.info("Configuration loaded from %s", self.config_path or "<defaults>")

    def _load_video_config(self) -> None:
        """Load and validate video configuration."""
        video = build_section('video', VideoConfig, self._config_data.get('video'))
        for name in ('width', 'height'):
            value = getattr(video, name)
            if value is not None and value <= 0:
                raise ConfigurationError(f"video.{name} must be positive")
        if video.stride < 1:
            raise ConfigurationError("video.stride must be positive")
        if video.frame_rate <= 0:
            raise ConfigurationError("video.frame_rate must be positive")
        self._sections['video'] = video

    def _load_detector_config(self) -> None:
        """Load and validate detector configuration."""
        detector = build_section('detector', DetectorConfig, self._config_data.get('detector'))
        if not 0.0 < detector.threshold < 1.0:
            raise ConfigurationError("detector.threshold must lie in (0, 1)")
        if detector.max_separation < 1:
            raise ConfigurationError("detector.max_separation must be at least 1")
        if detector.window < 1 or detector.window_stride < 1:
            raise ConfigurationError("detector.window and detector.window_stride must be positive")
        if detector.hidden_units < 1 or detector.input_dim < 1:
            raise ConfigurationError("detector.hidden_units and detector.input_dim must be positive")
        if detector.learning_rate <= 0:
            raise ConfigurationError("detector.learning_rate must be positive")
        if detector.batch_size < 1 or detector.epochs < 1:
            raise ConfigurationError("detector.batch_size and detector.epochs must be positive")
        self._sections['detector'] = detector

    def _load_mc_config(self) -> None:
        """Load and validate motion compensation configuration."""
        mc = build_section('mc', McConfig, self._config_data.get('mc'))
        for name in ('coarse_strides', 'fine_strides', 'pixel_strides'):
            strides = getattr(mc, name)
            if len(strides) != 5 or any(s not in (1, 2) for s in strides):
                raise ConfigurationError(f"mc.{name} must list five strides of 1 or 2")
        if mc.r_max <= 0:
            raise ConfigurationError("mc.r_max must be positive")
        if mc.filters < 1:
            raise ConfigurationError("mc.filters must be positive")
        self._sections['mc'] = mc

    def _load_qe_config(self) -> None:
        """Load and validate quality enhancement configuration."""
        qe = build_section('qe', QeConfig, self._config_data.get('qe'))
        if qe.filters < 1 or qe.growth < 1 or qe.dense_layers < 1:
            raise ConfigurationError("qe.filters, qe.growth and qe.dense_layers must be positive")
        if any(k % 2 == 0 for k in qe.kernel_sizes) or qe.reconstruction_kernel % 2 == 0:
            raise ConfigurationError("qe kernel sizes must be odd")
        if not 0.0 < qe.bn_decay < 1.0:
            raise ConfigurationError("qe.bn_decay must lie in (0, 1)")
        self._sections['qe'] = qe

    def _load_training_config(self) -> None:
        """Load and validate MF-CNN training configuration."""
        training = build_section('training', TrainConfig, self._config_data.get('training'))
        validate_train_config(training)
        self._sections['training'] = training

    def _load_pipeline_config(self) -> None:
        """Load and validate pipeline configuration."""
        pipeline = build_section('pipeline', PipelineConfig, self._config_data.get('pipeline'))
        if pipeline.reference_mode not in ('pqf', 'neighbor'):
            raise ConfigurationError("pipeline.reference_mode must be 'pqf' or 'neighbor'")
        if pipeline.label_source not in ('detector', 'ground_truth'):
            raise ConfigurationError("pipeline.label_source must be 'detector' or 'ground_truth'")
        if pipeline.tile_overlap < 0 or pipeline.tile_size <= 2 * pipeline.tile_overlap:
            raise ConfigurationError("pipeline.tile_size must exceed twice pipeline.tile_overlap")
        if pipeline.benchmark_repeats < 1 or pipeline.benchmark_warmup < 0:
            raise ConfigurationError("pipeline benchmark settings must be non-negative")
        self._sections['pipeline'] = pipeline

    def _load_logging_config(self) -> None:
        """Load and validate logging configuration."""
        log_config = build_section('logging', LoggingConfig, self._config_data.get('logging'))
        log_config.level = log_config.level.upper()
        if log_config.level not in _LOG_LEVELS:
            raise ConfigurationError(f"logging.level must be one of {', '.join(sorted(_LOG_LEVELS))}")
        self._sections['logging'] = log_config

    def apply_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> None:
        """Apply command-line overrides on top of the loaded file values.

        Args:
            overrides: Mapping of section name to {key: value}; None values
                are ignored so unset flags never clobber the file

        Raises:
            ConfigurationError: If a section or key is unknown, or the
                resulting configuration is invalid
        """
        if self._config_data is None:
            self.load_config()

        merged = {name: dict(self._config_data.get(name) or {}) for name in _SECTIONS}
        for section, values in overrides.items():
            if section not in _SECTIONS:
                raise ConfigurationError(f"Unknown configuration section: {section}")
            for key, value in values.items():
                if value is not None:
                    merged[section][key] = value

        self._config_data = merged
        self._load_all()
        logger.info("Applied command-line overrides: %s", {
            s: {k: v for k, v in vals.items() if v is not None} for s, vals in overrides.items()
        })

    def _load_all(self) -> None:
        """Validate and load each configuration section."""
        self._load_video_config()
        self._load_detector_config()
        self._load_mc_config()
        self._load_qe_config()
        self._load_training_config()
        self._load_pipeline_config()
        self._load_logging_config()

    def _section(self, name: str):
        if name not in self._sections:
            raise ConfigurationError("Configuration not loaded. Call load_config() first.")
        return self._sections[name]

    @property
    def video_config(self) -> VideoConfig:
        """Get video configuration."""
        return self._section('video')

    @property
    def detector_config(self) -> DetectorConfig:
        """Get detector configuration."""
        return self._section('detector')

    @property
    def mc_config(self) -> McConfig:
        """Get motion compensation configuration."""
        return self._section('mc')

    @property
    def qe_config(self) -> QeConfig:
        """Get quality enhancement configuration."""
        return self._section('qe')

    @property
    def train_config(self) -> TrainConfig:
        """Get MF-CNN training configuration."""
        return self._section('training')

    @property
    def pipeline_config(self) -> PipelineConfig:
        """Get pipeline configuration."""
        return self._section('pipeline')

    @property
    def logging_config(self) -> LoggingConfig:
        """Get logging configuration."""
        return self._section('logging')

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        """Return the fully resolved configuration as plain data.

        Raises:
            ConfigurationError: If configuration hasn't been loaded
        """
        return {name: config_to_dict(self._section(name)) for name in _SECTIONS}


def config_to_dict(config: Any) -> Dict[str, Any]:
    """Convert a config dataclass to YAML-friendly plain data."""
    data = asdict(config)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in data.items()}


def config_from_dict(cls: Type, data: Dict[str, Any], section: str = 'checkpoint'):
    """Rebuild a config dataclass stored inside a checkpoint."""
    return build_section(section, cls, data)


def validate_train_config(training: TrainConfig) -> None:
    """Validate MF-CNN training settings.

    Raises:
        ConfigurationError: If any weight or rate is out of range
    """
    weights = (training.stage1_a, training.stage1_b, training.stage2_a, training.stage2_b)
    if any(w <= 0 for w in weights):
        raise ConfigurationError("training loss weights a and b must be positive")
    if not 0.0 < training.learning_rate <= 1e-3:
        raise ConfigurationError("training.learning_rate must lie in (0, 1e-3]; larger rates stall the MC-subnet")
    if training.batch_size < 1 or training.patch < 8:
        raise ConfigurationError("training.batch_size must be positive and training.patch at least 8")
    if training.convergence_window < 1 or not 0.0 < training.convergence_threshold < 1.0:
        raise ConfigurationError("training convergence window/threshold out of range")
    if training.stage1_max_steps < 1 or training.stage2_steps < 1:
        raise ConfigurationError("training step counts must be positive")
