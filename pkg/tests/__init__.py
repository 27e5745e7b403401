# tests/__init__.py
"""Quasimode toolkit tests."""
