from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Process configuration loaded from environment variables."""

    app_name: str = "kawlab"
    debug: bool = False
    log_level: str = "INFO"

    # Where trajectories and reports are written
    output_dir: Path = Path("runs")

    # Run ledger (any SQLAlchemy URL; SQLite by default)
    database_url: str = "sqlite:///kawlab.db"
    record_runs: bool = True

    # Sweep execution
    workers: int = 1
    sweep_cap: int = 64

    # Dense linear algebra is only used as a reference oracle
    dense_limit: int = 512
    propagator_limit: int = 256

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "env_prefix": "KAWLAB_",
    }


@lru_cache
def get_settings() -> Settings:
    return Settings()
