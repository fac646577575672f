"""Functional intrinsic volumes of convex functions and their Steiner formulas."""

__version__ = "0.1.0"
