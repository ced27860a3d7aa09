"""Stochastic steering distillation with single Kraus local filters."""
from steerdistil._version import __version__  # type: ignore[import]

__all__ = ["__version__"]
