"""Hybrid quantum/post-quantum key distribution: rates, relay protocols, access structures, switching."""

__version__ = "0.1.0"
