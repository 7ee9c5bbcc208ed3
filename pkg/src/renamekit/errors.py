"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigurationError -> 2,
DataError -> 3, everything else -> 4.
"""


class RenamekitError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(RenamekitError):
    """Bad flags, conflicting settings, missing credentials."""


class DataError(RenamekitError):
    """Malformed or inconsistent input data (files, ids, masks)."""


class ValidationError(DataError):
    """A produced artifact violates its declared invariants."""


class ClientError(RenamekitError):
    """A language-model client call failed."""


class FixtureMissError(ClientError):
    """A replayed prompt has no recorded response."""


class EmbeddingError(RenamekitError):
    """Text embedding could not be produced (e.g. degenerate ensemble)."""


class TrainingDiverged(RenamekitError):
    """Training loss became non-finite; a checkpoint was saved first."""
