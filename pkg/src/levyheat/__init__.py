"""Numerical heat-kernel toolkit for symmetric pure-jump Lévy processes."""

__version__ = "0.1.0"
