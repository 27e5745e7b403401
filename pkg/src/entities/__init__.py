# src/entities/__init__.py
"""Operator specs, coefficients and report types."""
