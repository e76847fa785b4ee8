"""Exact Witt-algebra actions on welding coefficients and the moments they determine."""

__version__ = "0.1.0"
