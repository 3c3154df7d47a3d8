"""Tuning the weight vector of linear classifiers through a single scalar alpha."""

__version__ = "0.1.0"
