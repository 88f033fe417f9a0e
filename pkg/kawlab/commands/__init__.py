from kawlab.commands import (
    decay_fit,
    duhamel,
    export_csv,
    massera,
    mms,
    observability,
    simulate,
    sweep,
)

COMMANDS = (simulate, decay_fit, observability, duhamel, massera, mms, sweep, export_csv)

__all__ = ["COMMANDS"]
