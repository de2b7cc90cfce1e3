"""Eisenstein series on convex co-compact hyperbolic surfaces."""
__version__ = "0.1.0"
