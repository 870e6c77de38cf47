"""Solvers for a fuzzy probabilistic logic of knowledge and actions."""

__version__ = "0.1.0"
