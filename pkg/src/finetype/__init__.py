"""Context-dependent fine-grained entity type tagging toolkit."""

__version__ = "0.1.0"
