"""modelsvc: sidecar inference service for report summarization."""

__version__ = "0.1.0"
