"""
Self-describing, integrity-checked checkpoint files.

Layout: an 8-byte magic, the SHA-256 digest of the payload, then the payload
serialized with ``torch.save``. The payload carries the format version, the
checkpoint kind, the architecture config, free-form extras (normalizer,
threshold, training stage, seed) and one state dict per network.
"""

import hashlib
import io
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import torch

from ..errors import ValidationFailure

logger = logging.getLogger(__name__)

MAGIC = b'MFQECKPT'
FORMAT_VERSION = 1
_DIGEST_BYTES = hashlib.sha256().digest_size

DETECTOR_KIND = 'detector'
MFCNN_KIND = 'mfcnn'


class CheckpointError(ValidationFailure):
    """Raised on corrupt, incompatible or mismatched checkpoint files."""
    pass


@dataclass
class Checkpoint:
    """Contents of one checkpoint file."""
    kind: str
    config: Dict[str, Any]
    state: Dict[str, Dict[str, torch.Tensor]]
    extra: Dict[str, Any] = field(default_factory=dict)
    version: int = FORMAT_VERSION


def save_checkpoint(checkpoint: Checkpoint, path: str) -> None:
    """Serialize a checkpoint with its integrity digest.

    Raises:
        CheckpointError: If the file cannot be written
    """
    payload = {
        'version': checkpoint.version,
        'kind': checkpoint.kind,
        'config': checkpoint.config,
        'extra': checkpoint.extra,
        'state': {name: {k: v.detach().cpu() for k, v in state.items()}
                  for name, state in checkpoint.state.items()},
    }
    buffer = io.BytesIO()
    torch.save(payload, buffer)
    data = buffer.getvalue()

    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        with open(path, 'wb') as handle:
            handle.write(MAGIC)
            handle.write(hashlib.sha256(data).digest())
            handle.write(data)
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint {path}: {e}")

    logger.info("Saved %s checkpoint to %s", checkpoint.kind, path)


def load_checkpoint(path: str, kind: Optional[str] = None,
                    expected_config: Optional[Dict[str, Any]] = None) -> Checkpoint:
    """
    Load and verify a checkpoint.

    Args:
        path: Checkpoint file
        kind: Required checkpoint kind, if any
        expected_config: Architecture the caller expects; must match exactly

    Returns:
        Verified Checkpoint

    Raises:
        CheckpointError: On a missing file, bad magic, digest mismatch,
            format version mismatch or architecture mismatch
    """
    if not os.path.exists(path):
        raise CheckpointError(f"Checkpoint not found: {path}")

    with open(path, 'rb') as handle:
        raw = handle.read()

    header = len(MAGIC) + _DIGEST_BYTES
    if len(raw) < header or raw[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file")

    digest, data = raw[len(MAGIC):header], raw[header:]
    if hashlib.sha256(data).digest() != digest:
        raise CheckpointError(f"{path} failed its integrity check (truncated or corrupt)")

    try:
        payload = torch.load(io.BytesIO(data), map_location='cpu', weights_only=True)
    except Exception as e:
        raise CheckpointError(f"Cannot decode checkpoint {path}: {e}")

    version = payload.get('version')
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path} has format version {version}, expected {FORMAT_VERSION}")

    checkpoint = Checkpoint(kind=payload['kind'], config=payload['config'],
                            state=payload['state'], extra=payload.get('extra', {}),
                            version=version)

    if kind is not None and checkpoint.kind != kind:
        raise CheckpointError(f"{path} holds a {checkpoint.kind} checkpoint, expected {kind}")
    if expected_config is not None:
        require_config_match(checkpoint, expected_config, path)

    logger.debug("Loaded %s checkpoint from %s", checkpoint.kind, path)
    return checkpoint


def require_config_match(checkpoint: Checkpoint, expected: Dict[str, Any], path: str = '<memory>') -> None:
    """Raise CheckpointError unless every expected section matches the stored one."""
    for section, values in expected.items():
        stored = checkpoint.config.get(section)
        if stored != values:
            raise CheckpointError(
                f"{path}: architecture mismatch in '{section}' "
                f"(checkpoint {stored!r}, expected {values!r})"
            )
