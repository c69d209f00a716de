"""Exception hierarchy shared across the package."""


class LiverSegError(Exception):
    """Base class for every error raised by liverseg."""


class PnmError(LiverSegError, ValueError):
    pass


class MalformedHeader(PnmError):
    pass


class TruncatedData(PnmError):
    pass


class UnsupportedMaxval(PnmError):
    pass


class InvalidBand(LiverSegError, ValueError):
    pass


class TooSmall(LiverSegError, ValueError):
    pass


class InvalidWindow(LiverSegError, ValueError):
    pass


class DimensionMismatch(LiverSegError, ValueError):
    pass


class NoForeground(LiverSegError):
    """The mask has no foreground pixel, so there is no largest component."""


class LiverNotFound(LiverSegError):
    """Raised by the pipeline when no plausible liver candidate survives.

    ``stages`` holds the images computed before the failure (original,
    thresholded, median-filtered) so callers can still dump them.
    """

    def __init__(self, message, stages=()):
        super().__init__(message)
        self.stages = tuple(stages)


class EmptySampleSet(LiverSegError, ValueError):
    pass


class EmptyCorpus(LiverSegError, ValueError):
    pass


class IoFailure(LiverSegError, OSError):
    pass
