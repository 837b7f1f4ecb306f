"""Exact pseudohermitian calculus for 3-dimensional CR manifolds."""

__version__ = "0.1.0"
