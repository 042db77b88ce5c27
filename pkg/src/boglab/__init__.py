"""Numerical toolkit for Bogovskii operators on annulus-like domains."""

__version__ = "0.1.0"
