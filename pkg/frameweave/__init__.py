"""Numerical laboratory for weaving wavelet, Gabor and fusion frames."""

__version__ = "0.1.0"
