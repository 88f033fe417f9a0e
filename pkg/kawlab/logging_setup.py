"""
Logging configuration for the CLI and scripts.

Uses the same line format as the migration tooling in ``alembic.ini`` so that
ledger migrations and experiment runs print alike.
"""

import logging

LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"
DATE_FORMAT = "%H:%M:%S"


def configure_logging(level: str | int = "INFO") -> None:
    """Install a single stderr handler on the root logger (idempotent)."""
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    root = logging.getLogger()
    root.setLevel(level)
    for handler in root.handlers:
        if getattr(handler, "_kawlab", False):
            handler.setLevel(level)
            return

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    handler.setLevel(level)
    handler._kawlab = True  # type: ignore[attr-defined]
    root.addHandler(handler)

    # SQLAlchemy is chatty at INFO; keep it at WARN like alembic.ini does.
    logging.getLogger("sqlalchemy.engine").setLevel(logging.WARNING)
