"""Pattern-based integrated service solution engine."""

__version__ = "0.1.0"
