"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when shapes, dimensions, or option combinations are invalid."""


class NumericsError(RuntimeError):
    """Raised when a computation produces or receives non-finite values."""


class CheckpointError(RuntimeError):
    """Raised when a checkpoint file cannot be loaded safely."""


class TrainingDiverged(RuntimeError):
    """Raised when a training run hits a non-finite loss.

    Carries the path of the diagnostic checkpoint written just before the
    abort, if one could be saved.
    """

    def __init__(self, message: str, checkpoint_path=None):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path
