"""Anomalous primes for rationally 2-isogenous elliptic curves."""

__version__ = "0.1.0"
