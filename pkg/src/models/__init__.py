# src/models/__init__.py
"""Model operators, exponent bookkeeping and quasimode construction."""
