# config/__init__.py
"""Settings and numerical constants."""
