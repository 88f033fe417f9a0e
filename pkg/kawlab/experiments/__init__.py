from kawlab.experiments.runner import EXPERIMENTS, run_experiment

__all__ = ["EXPERIMENTS", "run_experiment"]
