# tests/test_api/__init__.py
"""Config and CLI tests package."""
