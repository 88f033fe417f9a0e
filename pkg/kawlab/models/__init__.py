"""
Re-export all SQLAlchemy models of the run ledger.

Usage:
    from kawlab.models import ExperimentRun, SweepCell
"""

from kawlab.models.run import ExperimentRun
from kawlab.models.sweep import SweepCell

__all__ = [
    "ExperimentRun",
    "SweepCell",
]
