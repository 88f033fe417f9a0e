from kawlab.schemas.config import RunConfig, load_config, parse_config
from kawlab.schemas.forcing import ForcingMode, ForcingSpec
from kawlab.schemas.report import ExperimentReport, Verdict

__all__ = [
    "RunConfig",
    "load_config",
    "parse_config",
    "ForcingMode",
    "ForcingSpec",
    "ExperimentReport",
    "Verdict",
]
