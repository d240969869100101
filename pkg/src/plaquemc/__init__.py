"""Channel models for molecular communication in a plaque-obstructed artery."""

__version__ = "0.1.0"
