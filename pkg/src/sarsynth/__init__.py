"""Dual-paradigm SAR target-signature simulation and synthetic dataset production."""

__version__ = "0.1.0"
