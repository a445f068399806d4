"""itelint: a context-aware lint engine for issue-tracking ecosystems."""

__version__ = "0.1.0"
