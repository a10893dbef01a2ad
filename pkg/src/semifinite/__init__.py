"""Executable semifinite spectral theory on model operators."""

__version__ = "0.1.0"
