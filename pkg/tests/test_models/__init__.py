# tests/test_models/__init__.py
"""Core numerics tests package."""
