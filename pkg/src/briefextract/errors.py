"""Base exception hierarchy for BriefExtract.

Each module defines its own concrete errors on top of these categories.
The category decides the CLI exit code.
"""


class BriefExtractError(Exception):
    """Root of all BriefExtract errors."""

    exit_code = 2


class ConfigError(BriefExtractError):
    """Bad usage, bad config file, or a config invariant broken."""

    exit_code = 1


class DataError(BriefExtractError):
    """Input data that cannot be processed as requested."""

    exit_code = 2


class EndpointError(BriefExtractError):
    """Chat-completions endpoint could not produce a response."""

    exit_code = 3
