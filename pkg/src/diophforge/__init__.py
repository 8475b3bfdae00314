"""Desk-scale construction of a 32-unknown diophantine definition of Q \\ Z."""

__version__ = "0.1.0"
