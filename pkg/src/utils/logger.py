# src/utils/logger.py
"""Logging configuration."""
import logging
import os
from datetime import datetime

from config.settings import LOG_DIR, LOG_LEVEL

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logger(name: str = "src", log_to_file: bool = True) -> logging.Logger:
    """Configure structured logging for a run.

    Attaches a console handler and, unless disabled, a dated file handler
    under LOG_DIR. Calling it twice does not duplicate handlers.
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, LOG_LEVEL.upper(), logging.INFO))

    if logger.handlers:
        return logger

    formatter = logging.Formatter(LOG_FORMAT)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_to_file:
        os.makedirs(LOG_DIR, exist_ok=True)
        log_filename = os.path.join(LOG_DIR, f"{datetime.now().strftime('%Y%m%d')}.log")
        file_handler = logging.FileHandler(log_filename)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger
