"""Finite-model engine for the calculus of relations."""

__version__ = "0.1.0"
