from __future__ import annotations

import logging
import sys

__all__ = [
    "AVAILABLE_LOGGERS",
    "void_logger",
    "shell_debug_logger",
    "shell_info_logger",
    "resolve_logger",
]

from typing import Dict, Final

_LOGGER_ROOT_NAME: Final[str] = "lrdw"

# replicates run on pool threads, so every line names its thread;
# stdout is reserved for CSV tables
_stream_handler: logging.StreamHandler = logging.StreamHandler(sys.stderr)
_stream_handler.setFormatter(
    logging.Formatter(
        "%(asctime)s - %(threadName)s - %(filename)s - %(levelname)s - %(message)s"
    )
)

AVAILABLE_LOGGERS: Final[Dict[str, logging.Logger]] = {}


def _register(name: str, level: int | None = None) -> logging.Logger:
    logger = logging.getLogger(f"{_LOGGER_ROOT_NAME}.{name}")
    if level is None:
        logger.addHandler(logging.NullHandler())
        logger.propagate = False
    else:
        logger.setLevel(level)
        logger.addHandler(_stream_handler)
    AVAILABLE_LOGGERS[name] = logger
    return logger


void_logger = _register("void")
shell_debug_logger = _register("shell_debug", logging.DEBUG)
shell_info_logger = _register("shell_info", logging.INFO)


def resolve_logger(name: str) -> logging.Logger:
    """
    :raise ValueError: when no logger is registered under `name`
    """
    logger = AVAILABLE_LOGGERS.get(name.strip())
    if logger is None:
        raise ValueError(
            f"unknown logger {name!r}, choose from {', '.join(AVAILABLE_LOGGERS)}"
        )
    return logger
