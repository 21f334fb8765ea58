"""Dummy risk minimization laboratory for small feed-forward classifiers."""

__version__ = "0.1.0"
