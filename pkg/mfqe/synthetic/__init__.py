# Synthetic desk-scale corpus module

from .generator import (
    FIXTURE_FRAMES, FIXTURE_RAW, FIXTURE_COMP, FIXTURE_META, CorruptionConfig, SyntheticClip,
    pqf_distances, make_clip, make_corpus, write_fixture,
)

__all__ = [
    'FIXTURE_FRAMES', 'FIXTURE_RAW', 'FIXTURE_COMP', 'FIXTURE_META', 'CorruptionConfig',
    'SyntheticClip', 'pqf_distances', 'make_clip', 'make_corpus', 'write_fixture',
]
