"""Exact classical, one-bit and no-signaling bounds of Bell functionals,
plus numerical quantum violations on maximally entangled qudits."""

__version__ = "1.0.0"
