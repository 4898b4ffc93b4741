"""Shared fixtures for the test suite."""

import numpy as np
import pytest
import torch

from mfqe.config import McConfig, QeConfig, TrainConfig
from mfqe.synthetic import make_clip
from mfqe.video import Sequence


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_mc():
    """A narrow MC-subnet that keeps forward passes fast."""
    return McConfig(filters=4)


@pytest.fixture
def small_qe():
    """A narrow QE-subnet with the default layer structure."""
    return QeConfig(filters=4, growth=4, no_dense_c11_filters=6)


@pytest.fixture
def quick_training():
    return TrainConfig(batch_size=4, patch=64, convergence_window=2, stage1_max_steps=4,
                       stage2_steps=3, seed=7)


@pytest.fixture
def random_sequence(rng):
    def build(frames: int = 5, height: int = 16, width: int = 16) -> Sequence:
        return Sequence.from_luma(rng.random((frames, height, width)))
    return build


@pytest.fixture(scope='session')
def synthetic_clip():
    return make_clip(frames=12, width=64, height=64, seed=3)


@pytest.fixture(autouse=True)
def _deterministic_torch():
    torch.manual_seed(0)
    yield
