"""Probabilistic Horn abduction with best-first explanation search."""

__version__ = "0.1.0"
