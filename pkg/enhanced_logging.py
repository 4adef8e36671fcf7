import logging
import sys
from typing import Any, Dict, Optional

import structlog


def configure_logging(level: str = "WARNING", json_output: bool = False) -> None:
    """
    Configure structlog for the process: level filter, ISO timestamps, and
    JSON or console rendering, always on stderr
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"unknown log level '{level}'")
    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if json_output
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


class EnhancedLogger:
    """
    Bound structured logger for one component
    """

    def __init__(self, name: str, **context: Any):
        self.logger = structlog.get_logger(name).bind(component=name, **context)

    def log_event(self, event_type: str, data: Optional[Dict[str, Any]] = None) -> None:
        """Log a structured event with metadata"""
        self.logger.info(event_type, **(data or {}))

    def debug(self, event_type: str, **data: Any) -> None:
        self.logger.debug(event_type, **data)
