"""structlog setup shared by the CLI, the API and the library."""

import logging
import os
import sys
from typing import Optional

import structlog

_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """JSON lines on stderr; level from the argument, else LOG_LEVEL, else INFO."""
    global _configured
    name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    numeric = getattr(logging, name, logging.INFO)

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=numeric, force=True)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", key="ts"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(sort_keys=True),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )
    _configured = True


def bind_run(**context) -> None:
    """Attach run-wide keys (task, config hash) to every later log line."""
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(**context)


def get_logger(component: str):
    if not _configured:
        configure_logging()
    return structlog.get_logger(component).bind(component=component)
