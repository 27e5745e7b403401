# config/settings.py
"""Environment variables and configuration loader."""
import os
from dotenv import load_dotenv

load_dotenv()

# Output
OUTPUT_DIR = os.getenv("QUASIMODE_OUTPUT_DIR", "results")
LOG_DIR = os.getenv("QUASIMODE_LOG_DIR", "logs")
LOG_LEVEL = os.getenv("QUASIMODE_LOG_LEVEL", "INFO")

# Dense oracle memory guard (points per axis)
ORACLE_MAX_GRID = int(os.getenv("QUASIMODE_ORACLE_MAX_GRID", "64"))

# Parallel sweep workers
DEFAULT_JOBS = int(os.getenv("QUASIMODE_JOBS", "1"))

# Embed a date in SVG plots
SVG_TIMESTAMP = os.getenv("QUASIMODE_SVG_TIMESTAMP", "False").lower() == "true"
