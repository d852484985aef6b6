"""Finite-blocklength achievability and converse bounds for RIS-assisted MIMO links."""

__version__ = "0.1.0"
