"""Behavioral model extraction for a small object-oriented language."""

__version__ = "0.1.0"
