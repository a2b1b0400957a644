"""Headline generation toolkit with contextual feature fusion."""

__version__ = "0.1.0"
