"""Exception hierarchy for the gsarelay package."""


class GsaRelayError(Exception):
    """Base class for all package-specific errors."""


class InvalidMatrix(GsaRelayError):
    """A matrix argument is malformed (wrong shape, non-finite entries)."""


class SingularMatrix(GsaRelayError):
    """A square system is rank deficient (degenerate channel/design draw)."""


class InvalidConfig(GsaRelayError):
    """An antenna configuration is malformed or not in canonical order."""


class InvalidTuple(GsaRelayError):
    """A DoF tuple is malformed (negative or non-rational components)."""


class NonIntegerTuple(InvalidTuple):
    """A DoF tuple with fractional entries was passed where streams must be
    whole (synthesis does not implement symbol extension)."""


class InfeasibleTuple(GsaRelayError):
    """The requested DoF tuple lies outside the achievable region, or its
    alignment row requirements cannot be met."""


class AlignmentInfeasible(GsaRelayError):
    """A pair-precoder null space is smaller than the requested number of
    aligned streams."""


class TooManyStreams(GsaRelayError):
    """A user is asked to send more streams than active antennas."""


class InvalidDesign(GsaRelayError):
    """A transceiver design is internally inconsistent or does not match the
    channel realization it is applied to."""
