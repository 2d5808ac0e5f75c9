"""Boundary zeros of Gaussian random Dirichlet waves on planar domains."""

__version__ = "1.0.0"
