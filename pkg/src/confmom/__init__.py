"""Conformal transformations of four-momenta and their five-dimensional lift."""

__version__ = "0.1.0"
