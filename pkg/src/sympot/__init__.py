"""Toric symplectic potentials, moment cones and curvature verification."""

__version__ = "0.1.0"
