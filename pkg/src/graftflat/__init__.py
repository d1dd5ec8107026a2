"""Grafted hyperbolic surfaces, deflation to flat ribbon surfaces, and inflation back."""

__version__ = "0.1.0"
