"""Brute-force verification of a fundamental lemma between SO(5) and PGL(2)."""

__version__ = "0.1.0"
