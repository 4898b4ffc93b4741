import numpy as np
import pytest

from mfqe.errors import MfqeError, ValidationFailure
from mfqe.metrics import RdPoint
from mfqe.validation import AlignmentError, Input_Validator
from mfqe.video import Sequence


@pytest.fixture
def validator():
    return Input_Validator()


def test_alignment_error_is_a_validation_failure():
    assert issubclass(AlignmentError, ValidationFailure)
    assert issubclass(ValidationFailure, MfqeError)


def test_aligned_sequences(validator, random_sequence):
    assert validator.validate_aligned(random_sequence(3), random_sequence(3)) == (True, None)


def test_length_mismatch(validator, random_sequence):
    is_valid, error = validator.validate_aligned(random_sequence(3), random_sequence(4))
    assert not is_valid
    assert '3' in error and '4' in error


def test_dimension_mismatch_raises(validator, random_sequence):
    with pytest.raises(AlignmentError, match='Dimension mismatch'):
        validator.require_aligned(random_sequence(3, 16, 16), random_sequence(3, 16, 18))


def test_empty_sequence(validator):
    is_valid, error = validator.validate_sequence(Sequence(frames=[]))
    assert not is_valid
    assert error


@pytest.mark.parametrize('labels, length, ok', [
    ([0, 1, 0], 3, True),
    ([0, 1], 3, False),
    ([0, 2, 0], 3, False),
])
def test_labels(validator, labels, length, ok):
    assert validator.validate_labels(labels, length)[0] is ok


def test_rd_curve_needs_four_increasing_points(validator):
    good = [RdPoint(rate=r, quality=q) for r, q in ((100, 30), (200, 32), (400, 34), (800, 36))]
    assert validator.validate_rd_curve(good) == (True, None)
    assert not validator.validate_rd_curve(good[:3])[0]

    dipping = good[:3] + [RdPoint(rate=1600, quality=33)]
    assert 'increase' in validator.validate_rd_curve(dipping)[1]

    zero_rate = good[:3] + [RdPoint(rate=0, quality=40)]
    assert 'positive' in validator.validate_rd_curve(zero_rate)[1]


def test_require_same_shape(validator):
    validator.require_same_shape(np.zeros((4, 4)), np.ones((4, 4)))
    with pytest.raises(AlignmentError, match='Planes'):
        validator.require_same_shape(np.zeros((4, 4)), np.zeros((4, 5)), 'Planes')
