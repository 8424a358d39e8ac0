"""Inverse source problems for heat and wave equations with post-incident data."""

__version__ = "0.1.0"
