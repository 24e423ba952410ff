"""Feasible-space local search for the quadratic assignment problem."""

__version__ = "0.1.0"
