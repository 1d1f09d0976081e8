"""User interface components."""

from .cli import CLI
from .display import ReportDisplay

__all__ = ["CLI", "ReportDisplay"]
