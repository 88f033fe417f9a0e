"""
SQLAlchemy engine, session factory, and declarative Base for the run ledger.

The engine is created lazily so that importing the numerical core never needs
a database, and tests can point ``KAWLAB_DATABASE_URL`` at a temporary file.
"""

from collections.abc import Iterator
from contextlib import contextmanager

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from kawlab.config import get_settings

Base = declarative_base()

_engines: dict[str, Engine] = {}


def effective_database_url(url: str) -> str:
    """Return the database URL with the scheme fixed for SQLAlchemy 2.0+.

    Hosted Postgres providers hand out ``postgres://`` URLs, but SQLAlchemy
    2.0 only accepts ``postgresql://``.
    """
    if url.startswith("postgres://"):
        url = url.replace("postgres://", "postgresql://", 1)
    return url


def get_engine(url: str | None = None) -> Engine:
    """Return (and cache) the engine for ``url`` or the configured ledger URL."""
    url = effective_database_url(url or get_settings().database_url)
    engine = _engines.get(url)
    if engine is None:
        engine = create_engine(url, pool_pre_ping=True)
        _engines[url] = engine
    return engine


def SessionLocal(url: str | None = None) -> Session:
    factory = sessionmaker(autocommit=False, autoflush=False, bind=get_engine(url))
    return factory()


def init_db(url: str | None = None) -> None:
    """Create ledger tables that do not exist yet (migrations remain authoritative)."""
    import kawlab.models  # noqa: F401 -- models must be imported for metadata

    Base.metadata.create_all(bind=get_engine(url))


@contextmanager
def get_db(url: str | None = None) -> Iterator[Session]:
    """Yield a SQLAlchemy session and ensure cleanup."""
    db = SessionLocal(url)
    try:
        yield db
    finally:
        db.close()
