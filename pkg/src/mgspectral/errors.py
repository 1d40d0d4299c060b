"""Exception types shared across the package.

Every error raised on a documented failure path derives from
:class:`MgSpectralError`, so callers (in particular the CLI) can map library
failures onto exit codes without catching bare exceptions.
"""


class MgSpectralError(Exception):
    """Base class for all mgspectral errors."""


class ZeroDirectionError(MgSpectralError):
    """A direction triple was identically zero."""


class DegenerateLineError(MgSpectralError):
    """Line with p3 = 0: every mode sits on {k3 = 0} and is forced to zero."""


class VerticalZeroModeError(MgSpectralError):
    """Operation undefined on the {k3 = 0} plane."""


class ZeroFrequencyError(MgSpectralError):
    """Operation undefined at k = 0."""


class NonpositiveApertureError(MgSpectralError):
    """Cone aperture must be positive."""


class InsufficientSweepError(MgSpectralError):
    """Asymptotic probe needs at least 6 sweep points."""


class TruncationOverflowError(MgSpectralError):
    """A line mode does not fit inside the grid truncation."""


class PadTooSmallError(MgSpectralError):
    """Dealiased products require an oversampling factor of at least 3/2."""


class NonFiniteError(MgSpectralError):
    """A coefficient became non-finite during time integration."""

    def __init__(self, message, blow_up_time=None):
        super().__init__(message)
        self.blow_up_time = blow_up_time


class NoConvergenceError(MgSpectralError):
    """Picard difference ratios exceeded 1 for three consecutive iterations."""

    def __init__(self, message, ratios=None):
        super().__init__(message)
        self.ratios = list(ratios) if ratios is not None else []


class MissingConstantsError(MgSpectralError):
    """A required analysis constant (C_s, C_alpha, C_kappa, alpha) is unset."""


class InsufficientDataError(MgSpectralError):
    """Not enough trajectory records for the requested diagnostic."""


class DegenerateNormsError(MgSpectralError):
    """A decay fit was requested on records with vanishing norms."""


class MissingOrdersError(MgSpectralError):
    """Trajectory records do not include a required Sobolev order."""


class ConfigError(MgSpectralError):
    """Configuration file could not be parsed or is inconsistent."""
