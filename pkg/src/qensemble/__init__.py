"""Weighted quantum ensembles of instance-based quantum classifiers."""
__version__ = "0.1.0"
