"""Explicit formulas, local Weil terms and p-adic harmonic analysis."""
__version__ = "0.1.0"
