"""Static token-embedding export for transformer checkpoints."""

__version__ = "0.1.0"
