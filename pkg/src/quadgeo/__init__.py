"""Legendre surfaces in a 4-quadric on finite-difference grids."""

__version__ = "0.1.0"
