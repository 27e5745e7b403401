# src/utils/__init__.py
"""Logging setup and input checks."""
