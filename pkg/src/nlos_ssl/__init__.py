"""Diffraction-aware acoustic ray tracing and particle-filter source localization."""

__version__ = "0.1.0"
