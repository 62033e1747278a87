"""Boundary spike-layer concentration predictor and expansion verifier."""

__version__ = "1.0.0"
