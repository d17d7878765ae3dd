"""Exact finite-field experiments for rational curves on complete intersections."""
__version__ = "0.1.0"
