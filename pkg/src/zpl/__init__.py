"""Exact computations on Z-PL complexes, their covers and tropical structures."""

__version__ = "0.1.0"
