"""Infer a compatible, fully pinned requirements set after upgrading one library."""

__version__ = "0.1.0"
