"""Chaotic series analysis, weak-symmetry search and robust chaos generation."""

__version__ = "0.1.0"
