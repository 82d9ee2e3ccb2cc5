"""Verification toolkit for Hirota/Fay identities of Tau functions."""

__version__ = "0.1.0"
