"""Exception hierarchy shared across the toolkit."""


class AuscultError(Exception):
    """Base class for all toolkit errors."""


class RasterFormatError(AuscultError):
    """Raster document is malformed or has the wrong structure."""


class RasterRangeError(AuscultError):
    """Raster probabilities fall outside [0, 1]."""


class CohortFormatError(AuscultError):
    """Cohort document is malformed or an examination record is invalid."""


class EpisodeFinishedError(AuscultError):
    """An action was applied to an environment whose episode already ended."""


class IllegalActionError(AuscultError):
    """The requested action is not legal in the current environment state."""


class CheckpointError(AuscultError):
    """Checkpoint file is corrupt or does not match the expected shapes."""


class NonFiniteError(AuscultError):
    """A non-finite value appeared during network evaluation."""
