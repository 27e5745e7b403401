# src/services/__init__.py
"""Sweeps, verdicts and result files."""
