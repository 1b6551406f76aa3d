"""Exact and simulated probabilities for random closed sets and random continuous functions on Cantor space."""

__version__ = "0.1.0"
