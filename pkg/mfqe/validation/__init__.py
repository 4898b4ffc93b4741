# Input validation module

from .validator import Input_Validator, AlignmentError

__all__ = ['Input_Validator', 'AlignmentError']
