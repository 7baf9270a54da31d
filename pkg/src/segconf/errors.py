"""Exception types shared across the toolkit.

ValidationError maps to CLI exit code 1, everything else here to exit code 2.
"""


class SegconfError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(SegconfError, ValueError):
    """Bad input values, shapes, configs or manifests."""


class RasterFormatError(SegconfError, ValueError):
    """Malformed or unsupported PFM/PGM content."""


class CapabilityError(SegconfError, RuntimeError):
    """A scorer lacks a capability required by the requested method."""


class ScorerProtocolError(SegconfError, RuntimeError):
    """An external scorer violated the job-directory protocol."""


class ScorerLaunchError(ScorerProtocolError):
    """The external scorer process could not be started."""
