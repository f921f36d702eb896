from .pipelines import run_experiment
