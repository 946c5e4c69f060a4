"""
Logging configuration for the library and CLI.
"""

import json
import logging
import sys
from typing import Literal

from core.config import settings

_RESERVED = set(logging.LogRecord("", 0, "", 0, "", None, None).__dict__) | {"message", "asctime"}


class JsonFormatter(logging.Formatter):
    """One JSON object per record."""

    def format(self, record: logging.LogRecord) -> str:
        json_log = {
            "time": self.formatTime(record, self.datefmt),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        # Extra fields passed through `extra=`
        for key, value in record.__dict__.items():
            if key not in _RESERVED and key not in json_log and not key.startswith("_"):
                json_log[key] = value

        if record.exc_info:
            json_log["exception"] = self.formatException(record.exc_info)

        return json.dumps(json_log, default=str)


def setup_logging(
    level: str | None = None,
    format_style: Literal["simple", "detailed", "json"] | None = None,
) -> None:
    """
    Configure root logging. Records go to stderr so artifacts on stdout stay clean.
    """
    log_level_name = (level or settings.log_level).upper()
    log_level = getattr(logging, log_level_name, logging.INFO)

    if format_style is None:
        format_style = settings.log_format or "detailed"

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    if not root_logger.handlers:
        handler: logging.Handler = logging.StreamHandler(sys.stderr)
        root_logger.addHandler(handler)
    else:
        handler = root_logger.handlers[0]

    if format_style == "simple":
        formatter: logging.Formatter = logging.Formatter("%(levelname)s: %(message)s")
    elif format_style == "json":
        formatter = JsonFormatter(datefmt="%Y-%m-%d %H:%M:%S")
    else:  # detailed
        formatter = logging.Formatter(
            "%(asctime)s | %(levelname)-8s | %(name)s:%(lineno)d | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

    handler.setFormatter(formatter)
    handler.setLevel(log_level)

    logging.getLogger(__name__).debug(
        "Logging initialized",
        extra={"log_level": log_level_name, "log_format": format_style},
    )
