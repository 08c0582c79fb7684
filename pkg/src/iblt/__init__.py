"""Irregular invertible Bloom lookup tables: data structure, density evolution,
Monte Carlo failure curves and degree-distribution search."""

__version__ = "0.1.0"
