"""Personalized-instruction resolution pipeline and PerInstruct benchmark harness."""

__version__ = "0.1.0"
