"""Minimum spanning set estimation."""

__version__ = "0.1.0"
