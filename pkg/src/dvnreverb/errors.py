"""Exception hierarchy shared across the package."""


class DvnError(Exception):
    """Base class for all errors raised by dvnreverb."""


class InvalidWidthError(DvnError, ValueError):
    """A pulse width is outside ``1 <= w <= T`` for its grid cell."""


class DegenerateProbabilityError(DvnError, ValueError):
    """A probability vector has no positive entry."""

    def __init__(self, message, pulse=None):
        super().__init__(message)
        self.pulse = pulse


class InvariantError(DvnError, ValueError):
    """A structural invariant (e.g. non-overlapping pulses) does not hold."""


class StabilityError(DvnError, ValueError):
    """A recursive filter has a pole on or outside the unit circle."""


class DegenerateFrameError(DvnError, ValueError):
    """An analysis frame carries no energy."""


class ConditioningError(DvnError, ArithmeticError):
    """Levinson-Durbin produced a reflection coefficient of magnitude >= 1."""


class AnalysisError(DvnError, ValueError):
    """Input is unsuitable for analysis (too short, silent, misconfigured)."""

    def __init__(self, message, stage=None):
        if stage is not None:
            message = f"[{stage}] {message}"
        super().__init__(message)
        self.stage = stage


class NnlsError(DvnError, ArithmeticError):
    """NNLS failed; carries the frame index when raised from a batch."""

    def __init__(self, message, frame=None, best=None):
        if frame is not None:
            message = f"frame {frame}: {message}"
        super().__init__(message)
        self.frame = frame
        self.best = best


class NnlsConvergenceError(NnlsError):
    """The active-set iteration limit was hit; ``best`` holds the last iterate."""


class InsufficientDecayError(DvnError, ValueError):
    """An energy decay curve does not reach the lower end of the fit range."""


class WavError(DvnError, IOError):
    """Base class for WAV codec failures."""


class MalformedHeaderError(WavError):
    pass


class UnsupportedCodecError(WavError):
    pass


class TruncatedDataError(WavError):
    pass


class ModelFileError(DvnError, ValueError):
    """Base class for model (JSON) persistence failures."""


class SchemaError(ModelFileError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class VersionError(ModelFileError):
    pass
