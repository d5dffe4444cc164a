"""
Logging configuration for the pipeline.
"""
import logging
import sys
from pathlib import Path
from typing import Optional

from hydrotwin.config import LOG_LEVEL_ALIASES, settings


CONSOLE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(module)s.%(funcName)s:%(lineno)d - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def _level(log_level: str) -> int:
    """Numeric level for a CLI alias (error, warn, info, debug) or a logging name."""
    return getattr(logging, LOG_LEVEL_ALIASES.get(log_level.strip().lower(), log_level.upper()))


def setup_logger(
    name: str,
    log_level: str = "info",
    log_file: Optional[str] = None
) -> logging.Logger:
    """
    Set up a logger writing to stderr and, optionally, to a file.

    Records go to stderr; stdout carries command output only.

    Args:
        name: Logger name
        log_level: error, warn, info or debug (upper-case logging names also work)
        log_file: Optional log file path (appended to)

    Returns:
        Configured logger instance
    """
    level = _level(log_level)

    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False
    logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT))
    logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_path, mode="a", encoding="utf-8")
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(file_handler)

    return logger


def set_level(log_level: str, target: Optional[logging.Logger] = None) -> None:
    """Change the level of a configured logger and all of its handlers."""
    target = target or logger
    level = _level(log_level)
    target.setLevel(level)
    for handler in target.handlers:
        handler.setLevel(level)


# Create default logger
logger = setup_logger("hydrotwin", settings.log_level, settings.log_file)
