# tests/test_services/__init__.py
"""Sweep and output tests package."""
