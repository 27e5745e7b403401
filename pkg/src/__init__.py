# src/__init__.py
"""Subprincipal-controlled quasimodes and pseudospectrum verification."""
