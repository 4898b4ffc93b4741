"""Exception roots shared by every subpackage."""


class MfqeError(Exception):
    """Base class for all errors raised by the toolkit."""
    pass


class ValidationFailure(MfqeError):
    """Raised when user-supplied input (files, flags, config) is invalid.

    The command line maps this family to exit code 1; every other
    ``MfqeError`` is treated as a runtime failure.
    """
    pass


class TrainingError(MfqeError):
    """Raised when a training run cannot proceed (empty data, NaN loss).

    ``checkpoint`` holds the last parameters known to produce a finite loss,
    when there are any.
    """

    def __init__(self, message: str, checkpoint=None):
        super().__init__(message)
        self.checkpoint = checkpoint
