"""Numerical probes for spaces of entire functions defined by weight families."""

__version__ = "0.1.0"
