"""Exact single-mode dynamics of a frequency-tunable Kerr cavity."""

__version__ = "0.1.0"
