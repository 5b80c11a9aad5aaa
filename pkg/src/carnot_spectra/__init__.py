"""Littlewood-Paley analysis, Besov norms and Fourier analysis on step-two Carnot groups."""

__version__ = "0.1.0"
