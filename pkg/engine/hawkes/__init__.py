"""Numerical engine for multivariate Hawkes processes with marks and sojourn times"""

__version__ = "1.1.0"
