"""Equilibria of random evolutionary games and finite-population AI race dynamics."""

__version__ = "0.1.0"
