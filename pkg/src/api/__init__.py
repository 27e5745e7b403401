# src/api/__init__.py
"""Experiment configuration schemas."""
