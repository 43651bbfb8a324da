"""roomsmith: interactive furniture-layout co-design engine."""

__version__ = "0.1.0"
