"""Parrondo coin games and Parrondo-style artificial traders on a receding market."""

__version__ = "0.1.0"
