"""Numerical laboratory for quantum open baker's maps and discrete fractal uncertainty."""

__version__ = "0.1.0"
