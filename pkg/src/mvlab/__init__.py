"""Numerical laboratory for mean values of multiplicative functions."""

__version__ = "0.1.0"
