from .plasma import unit_params, validate
from .experiments import run_experiment
