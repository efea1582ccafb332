"""Exception types shared across the pipeline."""


class ReachALError(Exception):
    """Base class for errors raised by this package."""


class BoundaryError(ReachALError):
    """A detection pixel falls outside the image; the record is discarded."""


class NoDepthError(ReachALError):
    """A depth patch has no valid cells or a non-positive depth was used."""


class IngestionError(ReachALError):
    """A detection file is missing or its header does not match the schema."""


class ConfigError(ReachALError):
    """A configuration file or parameter combination is invalid."""
