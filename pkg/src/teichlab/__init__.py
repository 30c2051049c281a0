"""Numerical laboratory comparing the flat and length-minimizing sides of a
one-parameter family of surfaces built from a filling pair of multicurves."""

__version__ = "0.1.0"
