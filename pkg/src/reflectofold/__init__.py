"""Exact construction and verification of one-cusped developable reflectofolds."""

__version__ = "0.1.0"
