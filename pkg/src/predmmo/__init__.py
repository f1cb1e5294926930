"""Slow-fast analysis of a two-predator, one-prey model with mixed-mode oscillations."""

__version__ = "0.1.0"
