"""Spectral decomposition of overcomplete random order-3 tensors."""

__version__ = "0.1.0"
