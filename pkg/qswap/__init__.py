"""Bright-beam continuous-variable entanglement swapping simulator."""

__version__ = "1.0.0"
