"""BriefExtract - structured information extraction from police briefing posts."""

__version__ = "0.1.0"
