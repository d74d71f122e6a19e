"""Evaluation toolkit for templated metaphor video captions."""

__version__ = "0.1.0"
