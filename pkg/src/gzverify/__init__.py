"""Numerical verification toolkit for theta lifts, Rankin-Selberg L-functions and CM cycle sums."""

__version__ = "0.1.0"
