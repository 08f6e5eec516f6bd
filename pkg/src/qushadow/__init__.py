"""Qudit shadow estimation with Clifford plus diagonal-magic measurement ensembles."""

__version__ = "0.1.0"
