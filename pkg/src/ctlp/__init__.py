"""Continuous-time linear programs: pointwise solver, regularity certificates and duality checks."""

__version__ = "0.1.0"
